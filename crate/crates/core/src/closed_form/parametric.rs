use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{ensure_param, Error, Result};

/// `a(t) = cosh_coeff · a(0) + sinh_coeff · a†(0)` with `u = κ√N_p t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BogoliubovSolution {
    pub cosh_coeff: C64,
    pub sinh_coeff: C64,
    pub u: f64,
    pub phi_p: f64,
}

impl BogoliubovSolution {
    /// `|cosh_coeff|² - |sinh_coeff|² - 1`
    pub fn symplectic_defect(&self) -> f64 {
        self.cosh_coeff.norm_sqr() - self.sinh_coeff.norm_sqr() - 1.0
    }

    /// `⟨n̂⟩` for a vacuum input.
    pub fn vacuum_photon_number(&self) -> f64 {
        self.sinh_coeff.norm_sqr()
    }
}

pub fn para_solution(u: f64, phi_p: f64) -> BogoliubovSolution {
    BogoliubovSolution {
        cosh_coeff: C64::new(u.cosh(), 0.0),
        sinh_coeff: C64::from_polar(u.sinh(), phi_p),
        u,
        phi_p,
    }
}

/// `((ΔX₁)², (ΔX₂)²)` for a vacuum input, `X₁ = X(0)`, `X₂ = X(π/2)`.
pub fn para_variances(u: f64, phi_p: f64) -> (f64, f64) {
    let (c2, s2) = ((phi_p / 2.0).cos().powi(2), (phi_p / 2.0).sin().powi(2));
    let (grow, shrink) = ((2.0 * u).exp() / 4.0, (-2.0 * u).exp() / 4.0);
    (grow * c2 + shrink * s2, grow * s2 + shrink * c2)
}

fn check_np(np: f64) -> Result<()> {
    ensure_param(np > 0.0 && np.is_finite(), || format!("pump photon number must be positive, got {np}"))
}

/// `(ΔX₂)²` averaged over the pump's phase noise: `e^{-2u}/4 + e^{2u}/(64N_p)`.
pub fn phase_averaged_var_x2(u: f64, np: f64) -> Result<f64> {
    check_np(np)?;
    Ok((-2.0 * u).exp() / 4.0 + (2.0 * u).exp() / (64.0 * np))
}

/// Dominant-term corrected variance
/// `e^{-2u}/4 + e^{2u}/(64N_p) - 3e^{4u}/(1024N_p²)`.
pub fn corrected_var_x2(u: f64, np: f64) -> Result<f64> {
    check_np(np)?;
    Ok(phase_averaged_var_x2(u, np)? - 3.0 * (4.0 * u).exp() / (1024.0 * np * np))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxSqueezing {
    pub u_star: f64,
    pub var_min: f64,
}

/// Minimum of the phase-averaged variance: `u* = ln(16N_p)/4`, `1/(8√N_p)`.
pub fn max_squeezing(np: f64) -> Result<MaxSqueezing> {
    check_np(np)?;
    let u_star = 0.25 * (16.0 * np).ln();
    Ok(MaxSqueezing {
        u_star,
        var_min: 1.0 / (8.0 * np.sqrt()),
    })
}

/// The same minimum found numerically: golden-section search brackets the
/// minimizer, then Newton iterations on the derivative polish it.
pub fn max_squeezing_numeric(np: f64) -> Result<MaxSqueezing> {
    check_np(np)?;
    let f = |u: f64| (-2.0 * u).exp() / 4.0 + (2.0 * u).exp() / (64.0 * np);
    let df = |u: f64| -(-2.0 * u).exp() / 2.0 + (2.0 * u).exp() / (32.0 * np);
    let d2f = |u: f64| (-2.0 * u).exp() + (2.0 * u).exp() / (16.0 * np);

    // The minimizer lies where the two exponentials balance; a wide bracket
    // around 0 covers N_p over many decades.
    let (mut lo, mut hi) = (-10.0f64, 0.25 * np.ln().abs() + 10.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-6 {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = df(u) / d2f(u);
        u -= step;
        if step.abs() < 1e-15 * u.abs().max(1.0) {
            break;
        }
    }
    if !u.is_finite() {
        return Err(Error::Numeric("squeezing minimization diverged".into()));
    }
    Ok(MaxSqueezing { u_star: u, var_min: f(u) })
}
