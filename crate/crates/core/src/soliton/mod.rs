//! Hartree solitons of the fiber nonlinear Schrödinger equation, a classical
//! split-step propagator, and the mean field of a coherent superposition of
//! number-state solitons.
//!
//! Everything is in the frame moving at the group velocity, with `ħ = 1`.
//! With `s = (2/ω'')^{1/2}` the Hartree profile is
//!
//! `h_n = 2η/(|g₃|(n-1))^{1/2} · exp[-4i(ξ² - η²)t - 2iξ s(x - x₀)] · sech[2η(s(x - x₀) + 4ξt)]`,
//!
//! and unit norm fixes `η = s|g₃|(n - 1)/4`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, Error, Result};

/// Largest allowed profile mass outside the grid.
pub const GRID_TAIL_TOL: f64 = 1e-8;
/// Value of `g₃²t n₀^{3/2}` below which the mean field counts as short-time.
pub const SHORT_TIME_LIMIT: f64 = 0.1;
/// Half-width of the photon-number window kept in the mean-field series, in
/// units of `n₀^{1/2}`.
pub const SERIES_WINDOW: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 1024;
pub const DEFAULT_WIDTHS: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub extent: f64,
    pub points: usize,
}

impl SpatialGrid {
    pub fn new(extent: f64, points: usize) -> Result<Self> {
        ensure_param(extent > 0.0 && extent.is_finite() && points >= 8, || {
            format!("grid needs positive extent and at least 8 points (got {extent}, {points})")
        })?;
        Ok(Self { extent, points })
    }

    pub fn dx(&self) -> f64 {
        self.extent / self.points as f64
    }

    /// Periodic lattice centered on zero, `x_j = -L/2 + j·dx`.
    pub fn x(&self) -> Vec<f64> {
        (0..self.points).map(|j| -self.extent / 2.0 + j as f64 * self.dx()).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn k(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.extent;
        (0..n).map(|j| dk * if j < (n + 1) / 2 { j } else { j - n } as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    pub omega1_dblprime: f64,
    pub g3: f64,
    pub v1: f64,
    /// Carrier frequency; enters only as the overall phase `e^{iω₁t}`
    #[serde(default)]
    pub omega1: f64,
    pub grid: SpatialGrid,
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        ensure_param(self.omega1_dblprime > 0.0 && self.g3 < 0.0, || {
            format!(
                "bound solitons need ω'' > 0 and g₃ < 0 (ω'' = {}, g₃ = {})",
                self.omega1_dblprime, self.g3
            )
        })
    }

    /// `(2/ω'')^{1/2}`
    pub fn scale(&self) -> f64 {
        (2.0 / self.omega1_dblprime).sqrt()
    }

    /// `η = s|g₃|(n - 1)/4`
    pub fn eta(&self, n: u32) -> f64 {
        self.scale() * self.g3.abs() * (n as f64 - 1.0) / 4.0
    }

    /// Distance over which the sech falls by `e`, `1/(2ηs)`.
    pub fn width(&self, n: u32) -> f64 {
        1.0 / (2.0 * self.eta(n) * self.scale())
    }

    /// Time for the Hartree phase `4η²t` to advance by `2π`.
    pub fn soliton_period(&self, n: u32) -> f64 {
        2.0 * std::f64::consts::PI / (4.0 * self.eta(n).powi(2))
    }

    /// Parameters with the default grid spanning `DEFAULT_WIDTHS` widths of
    /// the `n`-photon soliton.
    pub fn with_default_grid(omega1_dblprime: f64, g3: f64, n: u32) -> Result<Self> {
        let mut p = Self {
            omega1_dblprime,
            g3,
            v1: 0.0,
            omega1: 0.0,
            grid: SpatialGrid::new(1.0, DEFAULT_POINTS)?,
        };
        p.validate()?;
        ensure_param(n >= 2, || "photon number must be at least 2".into())?;
        p.grid = SpatialGrid::new(DEFAULT_WIDTHS * p.width(n), DEFAULT_POINTS)?;
        Ok(p)
    }
}

/// `g₃ = (3β⁽³⁾/8A)(k₁v₁ε₁)²`
pub fn g3_from_fiber(beta3: f64, area: f64, k1: f64, v1: f64, eps1: f64) -> Result<f64> {
    ensure_param(area > 0.0, || format!("mode area must be positive, got {area}"))?;
    Ok(3.0 * beta3 / (8.0 * area) * (k1 * v1 * eps1).powi(2))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldProfile {
    pub grid: SpatialGrid,
    pub values: Vec<C64>,
}

impl FieldProfile {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// `∫ conj(self)·other dx`
    pub fn overlap(&self, other: &FieldProfile) -> C64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * self.grid.dx()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= c);
        self
    }

    /// Relative L² distance between moduli, `‖|a| - |b|‖ / ‖a‖`.
    pub fn modulus_distance(&self, other: &FieldProfile) -> f64 {
        let d: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a.norm() - b.norm()).powi(2)).sum();
        (d / self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Relative L² distance between the complex fields.
    pub fn distance(&self, other: &FieldProfile) -> f64 {
        let d: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        (d / self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// `1 - tanh z` without cancellation for large `z`.
fn one_minus_tanh(z: f64) -> f64 {
    let e = (-2.0 * z).exp();
    2.0 * e / (1.0 + e)
}

fn hartree_values(n: u32, xi: f64, x0: f64, p: &FiberParams, t: f64) -> Vec<C64> {
    let s = p.scale();
    let eta = p.eta(n);
    let amp = 2.0 * eta / (p.g3.abs() * (n as f64 - 1.0)).sqrt();
    let carrier = p.omega1 * t - 4.0 * (xi * xi - eta * eta) * t;
    p.grid
        .x()
        .into_iter()
        .map(|x| {
            let y = s * (x - x0);
            let arg = 2.0 * eta * (y + 4.0 * xi * t);
            C64::from_polar(amp / arg.cosh(), carrier - 2.0 * xi * y)
        })
        .collect()
}

/// Hartree soliton `e^{iω₁t}h_n(x, t)` sampled on the parameter grid.
pub fn hartree_profile(n: u32, xi: f64, x0: f64, p: &FiberParams, t: f64) -> Result<FieldProfile> {
    p.validate()?;
    ensure_param(n >= 2, || format!("Hartree solitons need n ≥ 2, got {n}"))?;
    let kappa = 2.0 * p.eta(n) * p.scale();
    let center = x0 - 4.0 * xi * t / p.scale();
    let lo = -p.grid.extent / 2.0;
    let hi = lo + p.grid.extent;
    let tail = if center <= lo || center >= hi {
        1.0
    } else {
        0.5 * (one_minus_tanh(kappa * (center - lo)) + one_minus_tanh(kappa * (hi - center)))
    };
    if tail > GRID_TAIL_TOL {
        return Err(Error::Truncation { mode: 0, tail, tolerance: GRID_TAIL_TOL });
    }
    Ok(FieldProfile { grid: p.grid, values: hartree_values(n, xi, x0, p, t) })
}

/// Classical NLSE field matching the Hartree soliton, `(n-1)^{1/2} h_n`.
pub fn classical_soliton(n: u32, xi: f64, x0: f64, p: &FiberParams, t: f64) -> Result<FieldProfile> {
    let h = hartree_profile(n, xi, x0, p, t)?;
    Ok(h.scaled(C64::new((n as f64 - 1.0).sqrt(), 0.0)))
}

struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    scratch: Vec<C64>,
}

impl Spectral {
    fn new(grid: &SpatialGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.points);
        let inv = planner.plan_fft_inverse(grid.points);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { fwd, inv, k: grid.k(), scratch: vec![C64::new(0.0, 0.0); len] }
    }

    /// Applies the Fourier multiplier `f(k)` in place.
    fn multiply(&mut self, v: &mut [C64], f: impl Fn(f64) -> C64) {
        self.fwd.process_with_scratch(v, &mut self.scratch);
        let norm = 1.0 / v.len() as f64;
        for (x, &k) in v.iter_mut().zip(&self.k) {
            *x *= f(k) * norm;
        }
        self.inv.process_with_scratch(v, &mut self.scratch);
    }
}

/// Spectral second derivative on the periodic grid.
pub fn second_derivative(psi: &FieldProfile) -> Vec<C64> {
    let mut sp = Spectral::new(&psi.grid);
    let mut v = psi.values.clone();
    sp.multiply(&mut v, |k| C64::new(-k * k, 0.0));
    v
}

/// `∫ [(ω''/2)|ψ_x|² + g₃|ψ|⁴] dx`, the conserved energy of the classical
/// equation.
pub fn nlse_energy(psi: &FieldProfile, p: &FiberParams) -> f64 {
    let mut sp = Spectral::new(&psi.grid);
    let mut dpsi = psi.values.clone();
    sp.multiply(&mut dpsi, |k| C64::new(0.0, k));
    let dx = psi.grid.dx();
    dpsi.iter()
        .zip(&psi.values)
        .map(|(d, v)| 0.5 * p.omega1_dblprime * d.norm_sqr() + p.g3 * v.norm_sqr().powi(2))
        .sum::<f64>()
        * dx
}

/// Strang split-step integration of `iψ_t = -(ω''/2)ψ_xx + 2g₃|ψ|²ψ` over
/// `t_final` (which may be negative). The linear step is exact in Fourier
/// space; steps with `|dt| ≤ dx²/(πω'')` keep the phase error per mode small.
pub fn split_step_nlse(psi0: &FieldProfile, p: &FiberParams, t_final: f64, n_steps: usize) -> Result<FieldProfile> {
    ensure_param(n_steps > 0 && t_final.is_finite(), || "need a finite time and at least one step".into())?;
    ensure_param(psi0.grid == p.grid, || "profile grid differs from the fiber grid".into())?;
    let dt = t_final / n_steps as f64;
    let mut sp = Spectral::new(&p.grid);
    let mut v = psi0.values.clone();
    let half_nl = |v: &mut [C64]| {
        for x in v.iter_mut() {
            *x *= C64::from_polar(1.0, -p.g3 * x.norm_sqr() * dt);
        }
    };
    let lin = |k: f64| C64::from_polar(1.0, -0.5 * p.omega1_dblprime * k * k * dt);
    for step in 0..n_steps {
        half_nl(&mut v);
        sp.multiply(&mut v, lin);
        half_nl(&mut v);
        if v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite field after step {} of {n_steps} (dt = {dt:.3e}, t = {:.6e})",
                step + 1,
                (step + 1) as f64 * dt
            )));
        }
    }
    Ok(FieldProfile { grid: p.grid, values: v })
}

/// Residual of the Hartree equation `i∂h/∂t = -(ω''/2)h_xx + 2g₃(n-1)|h|²h`,
/// `‖LHS - RHS‖/‖RHS‖`, with the time derivative taken by central
/// difference.
pub fn hartree_residual(n: u32, xi: f64, x0: f64, p: &FiberParams, t: f64) -> Result<f64> {
    let mut q = *p;
    q.omega1 = 0.0;
    let h = hartree_profile(n, xi, x0, &q, t)?;
    let dt = 1e-6 * q.soliton_period(n);
    let plus = hartree_values(n, xi, x0, &q, t + dt);
    let minus = hartree_values(n, xi, x0, &q, t - dt);
    let hxx = second_derivative(&h);
    let c = 2.0 * q.g3 * (n as f64 - 1.0);
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..h.values.len() {
        let lhs = C64::new(0.0, 1.0) * (plus[i] - minus[i]) / (2.0 * dt);
        let rhs = -0.5 * q.omega1_dblprime * hxx[i] + c * h.values[i].norm_sqr() * h.values[i];
        num += (lhs - rhs).norm_sqr();
        den += rhs.norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// `g₃²t n₀^{3/2}`
pub fn diffusion_parameter(g3: f64, t: f64, n0: f64) -> f64 {
    g3 * g3 * t * n0 * n0.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanField {
    pub profile: FieldProfile,
    /// Photon numbers `n` kept in the series
    pub window: (u32, u32),
    /// Upper bound on `max_x |dropped terms|`
    pub tail_bound: f64,
    pub diffusion_parameter: f64,
    pub short_time: bool,
}

/// Poisson(`n0`) mass outside `[lo, hi]`: the lower part summed exactly,
/// the upper part by the Chernoff bound `e^{-n₀}(e n₀/m)^m`, `m = hi + 1`.
fn poisson_outside(n0: f64, lo: u32, hi: u32) -> f64 {
    let mut log_w = -n0;
    let mut below = 0.0;
    for k in 0..lo {
        if k > 0 {
            log_w += (n0 / k as f64).ln();
        }
        below += log_w.exp();
    }
    let m = hi as f64 + 1.0;
    let above = if m > n0 { (-n0 + m * (1.0 + (n0 / m).ln())).exp() } else { 1.0 };
    below + above
}

/// `⟨Ψ(x)⟩ = αe^{-|α|²} Σ_n (|α|^{2n}/n!) h̃_{n+1}(x,t) ⟨h̃_n|h̃_{n+1}⟩ⁿ`,
/// summed over `n ∈ [max(2, n₀ - 10n₀^{1/2}), n₀ + 10n₀^{1/2}]` (the Hartree
/// profile needs `n ≥ 2`). Overlaps are grid quadratures.
pub fn mean_field(alpha: C64, p: &FiberParams, t: f64) -> Result<MeanField> {
    p.validate()?;
    let n0 = alpha.norm_sqr();
    ensure_param(n0 >= 4.0, || format!("mean field needs |α|² ≥ 4, got {n0}"))?;
    let lo = ((n0 - SERIES_WINDOW * n0.sqrt()).floor().max(2.0)) as u32;
    let hi = (n0 + SERIES_WINDOW * n0.sqrt()).ceil() as u32;

    let mut log_w = -n0;
    for k in 1..=lo {
        log_w += (n0 / k as f64).ln();
    }
    let mut acc = vec![C64::new(0.0, 0.0); p.grid.points];
    let mut peak_amp: f64 = 0.0;
    let mut h_n = FieldProfile { grid: p.grid, values: hartree_values(lo, 0.0, 0.0, p, t) };
    for n in lo..=hi {
        if n > lo {
            log_w += (n0 / n as f64).ln();
        }
        let w = log_w.exp();
        let h_next = FieldProfile { grid: p.grid, values: hartree_values(n + 1, 0.0, 0.0, p, t) };
        let ov = h_n.overlap(&h_next).powu(n);
        let c = ov * w;
        for (a, h) in acc.iter_mut().zip(&h_next.values) {
            *a += c * h;
        }
        peak_amp = peak_amp.max(h_next.peak());
        h_n = h_next;
    }
    for a in acc.iter_mut() {
        *a *= alpha;
    }
    let dp = diffusion_parameter(p.g3, t, n0);
    // the dropped terms have modulus at most w_n |h_{n+1}|, and the peak of
    // h_{n+1} grows like (n+1)^{1/2}; bound it by the largest kept peak times
    // the growth to the far tail
    let growth = ((4.0 * n0).max(hi as f64 + 1.0) / (hi as f64 + 1.0)).sqrt().max(1.0);
    let tail_bound = alpha.norm() * poisson_outside(n0, lo, hi) * peak_amp * growth;
    Ok(MeanField {
        profile: FieldProfile { grid: p.grid, values: acc },
        window: (lo, hi),
        tail_bound,
        diffusion_parameter: dp,
        short_time: dp < SHORT_TIME_LIMIT,
    })
}
