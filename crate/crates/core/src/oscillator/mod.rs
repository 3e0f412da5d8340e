//! Degenerate parametric oscillator: classical steady states, their linear
//! stability, and below-threshold fluctuations.

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{ensure_param, Error, Result};
use crate::evolve::{steady_state_with, SteadyOptions};
use crate::fock::{annihilation, make_space, quadrature};
use crate::linalg::C64;
use crate::models::dpo_model_displaced;

/// Distance from threshold inside which the linearized moments are refused.
pub const THRESHOLD_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct DpoParams {
    pub kappa: f64,
    pub e0: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
}

impl DpoParams {
    pub fn new(kappa: f64, e0: f64, gamma_a: f64, gamma_b: f64) -> Result<Self> {
        let p = Self { kappa, e0, gamma_a, gamma_b };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `γ_a = γ_b = 1`, `κ = 1` and `E₀` chosen for the
    /// requested `κE₀/(γ_aγ_b)`.
    pub fn at_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_param(
            [self.kappa, self.e0, self.gamma_a, self.gamma_b].iter().all(|v| v.is_finite()),
            || "oscillator parameters must be finite".into(),
        )?;
        ensure_param(self.kappa >= 0.0 && self.e0 >= 0.0, || {
            format!("κ and E₀ must be non-negative (κ = {}, E₀ = {})", self.kappa, self.e0)
        })?;
        ensure_param(self.gamma_a > 0.0 && self.gamma_b > 0.0, || {
            format!("damping rates must be positive (γ_a = {}, γ_b = {})", self.gamma_a, self.gamma_b)
        })
    }

    /// `κE₀/(γ_aγ_b)`
    pub fn threshold_ratio(&self) -> f64 {
        self.kappa * self.e0 / (self.gamma_a * self.gamma_b)
    }

    fn require_below(&self) -> Result<()> {
        self.validate()?;
        let r = self.threshold_ratio();
        if r < 1.0 - THRESHOLD_MARGIN {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "linearized fluctuations need κE₀ < γ_aγ_b; threshold ratio is {r}"
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Below,
    AbovePlus,
    AboveMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyBranch {
    pub alpha0: C64,
    pub beta0: C64,
    pub branch: Branch,
    pub threshold_ratio: f64,
}

impl SteadyBranch {
    /// Largest absolute residual of the classical steady-state equations
    /// `κα₀*β₀ - γ_aα₀ = 0`, `-(κ/2)α₀² + E₀ - γ_bβ₀ = 0`.
    pub fn residual(&self, p: &DpoParams) -> f64 {
        let (a, b) = (self.alpha0, self.beta0);
        let r1 = a.conj() * b * p.kappa - a * p.gamma_a;
        let r2 = a * a * (-p.kappa / 2.0) + p.e0 - b * p.gamma_b;
        r1.norm().max(r2.norm())
    }
}

/// Below-threshold solution, plus the two above-threshold solutions when
/// `κE₀ ≥ γ_aγ_b`.
pub fn steady_branches(p: &DpoParams) -> Result<Vec<SteadyBranch>> {
    p.validate()?;
    let ratio = p.threshold_ratio();
    let mut out = vec![SteadyBranch {
        alpha0: C64::new(0.0, 0.0),
        beta0: C64::new(p.e0 / p.gamma_b, 0.0),
        branch: Branch::Below,
        threshold_ratio: ratio,
    }];
    if ratio >= 1.0 && p.kappa > 0.0 {
        let mag = 2f64.sqrt() / p.kappa * (p.e0 * p.kappa - p.gamma_a * p.gamma_b).max(0.0).sqrt();
        for (sign, branch) in [(1.0, Branch::AbovePlus), (-1.0, Branch::AboveMinus)] {
            out.push(SteadyBranch {
                alpha0: C64::new(sign * mag, 0.0),
                beta0: C64::new(p.gamma_a / p.kappa, 0.0),
                branch,
                threshold_ratio: ratio,
            });
        }
    }
    Ok(out)
}

/// Linearization matrix acting on `(δα, δα*, δβ, δβ*)`.
pub fn linearization_matrix(p: &DpoParams, s: &SteadyBranch) -> Matrix4<C64> {
    let z = C64::new(0.0, 0.0);
    let (k, ga, gb) = (p.kappa, C64::new(-p.gamma_a, 0.0), C64::new(-p.gamma_b, 0.0));
    let (a, b) = (s.alpha0, s.beta0);
    Matrix4::new(
        ga, b * k, a.conj() * k, z,
        b.conj() * k, ga, z, a * k,
        -a * k, z, gb, z,
        z, -a.conj() * k, z, gb,
    )
}

/// `[(λ+γ_a)(λ+γ_b) + κ²|α₀|² + κ|β₀|(λ+γ_b)] · [same with -κ|β₀|]`
pub fn characteristic_polynomial(p: &DpoParams, s: &SteadyBranch, lambda: C64) -> C64 {
    let common = (lambda + p.gamma_a) * (lambda + p.gamma_b) + p.kappa.powi(2) * s.alpha0.norm_sqr();
    let cross = (lambda + p.gamma_b) * (p.kappa * s.beta0.norm());
    (common + cross) * (common - cross)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stability {
    pub eigenvalues: Vec<C64>,
    /// Largest `|P(λ)|` over the eigenvalues, relative to the polynomial's scale
    pub polynomial_residual: f64,
    pub stable: bool,
}

pub fn stability_eigenvalues(p: &DpoParams, branch: &SteadyBranch) -> Result<Stability> {
    p.validate()?;
    let m = linearization_matrix(p, branch);
    let eig = m
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numeric("Schur form of the linearization did not triangularize".into()))?;
    let mut eigenvalues: Vec<C64> = eig.iter().copied().collect();
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let scale = m.iter().map(|v| v.norm()).fold(1.0, f64::max).powi(4);
    let polynomial_residual = eigenvalues
        .iter()
        .map(|&l| characteristic_polynomial(p, branch, l).norm() / scale)
        .fold(0.0, f64::max);
    Ok(Stability {
        stable: eigenvalues.iter().all(|l| l.re < 0.0),
        eigenvalues,
        polynomial_residual,
    })
}

/// Closed-form below-threshold eigenvalues `{-γ_b, -γ_b, -γ_a ± κE₀/γ_b}`.
pub fn below_threshold_eigenvalues(p: &DpoParams) -> [f64; 4] {
    let s = p.kappa * p.e0 / p.gamma_b;
    [-p.gamma_b, -p.gamma_b, -p.gamma_a - s, -p.gamma_a + s]
}

/// Closed-form above-threshold eigenvalues, the roots of
/// `λ² + (2γ_a+γ_b)λ + 2κE₀` and `λ² + γ_bλ + 2(κE₀ - γ_aγ_b)`.
pub fn above_threshold_eigenvalues(p: &DpoParams) -> [C64; 4] {
    let roots = |b: f64, c: f64| {
        let d = C64::new(b * b - 4.0 * c, 0.0).sqrt();
        [(-b - d) / 2.0, (-b + d) / 2.0]
    };
    let [l1, l2] = roots(2.0 * p.gamma_a + p.gamma_b, 2.0 * p.kappa * p.e0);
    let [l3, l4] = roots(p.gamma_b, 2.0 * (p.kappa * p.e0 - p.gamma_a * p.gamma_b));
    [l1, l2, l3, l4]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignalMoments {
    /// `⟨Δa†Δa⟩`
    pub number: f64,
    /// `⟨(Δa)²⟩`
    pub anomalous: C64,
}

impl SignalMoments {
    /// `(ΔX₂)² = (1 + 2⟨Δa†Δa⟩ - ⟨(Δa)²⟩ - ⟨(Δa†)²⟩)/4`
    pub fn var_x2(&self) -> f64 {
        (1.0 + 2.0 * self.number - 2.0 * self.anomalous.re) / 4.0
    }
}

/// Linearized steady-state signal moments below threshold:
/// `(κE₀)²/(2D)` and `γ_aγ_bκE₀/(2D)`, `D = (γ_aγ_b)² - (κE₀)²`.
pub fn below_threshold_moments(p: &DpoParams) -> Result<SignalMoments> {
    p.require_below()?;
    let g = p.gamma_a * p.gamma_b;
    let s = p.kappa * p.e0;
    let d = 2.0 * (g * g - s * s);
    Ok(SignalMoments {
        number: s * s / d,
        anomalous: C64::new(g * s / d, 0.0),
    })
}

/// `(ΔX₂)² = γ_aγ_b / (4(γ_aγ_b + κE₀))`
pub fn below_threshold_squeezing(p: &DpoParams) -> Result<f64> {
    p.require_below()?;
    let g = p.gamma_a * p.gamma_b;
    Ok(g / (4.0 * (g + p.kappa * p.e0)))
}

/// The squeezing formula evaluated at `κE₀ = γ_aγ_b`, the limit approached
/// from below threshold.
pub fn squeezing_threshold_limit(gamma_a: f64, gamma_b: f64) -> Result<f64> {
    ensure_param(gamma_a > 0.0 && gamma_b > 0.0, || "damping rates must be positive".into())?;
    let g = gamma_a * gamma_b;
    Ok(g / (4.0 * (g + g)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LindbladMoments {
    pub moments: SignalMoments,
    pub var_x2: f64,
    /// Population in the top Fock level of each mode
    pub edge_population: [f64; 2],
}

/// Signal moments of the full master-equation steady state, computed in the
/// frame where the pump is displaced by its below-threshold amplitude.
/// `dims` are (signal, pump-deviation) truncations.
pub fn lindblad_moments(p: &DpoParams, dims: [usize; 2], opts: &SteadyOptions) -> Result<LindbladMoments> {
    p.validate()?;
    let space = make_space(&dims)?;
    let model = dpo_model_displaced(&space, p.kappa, p.e0, p.gamma_a, p.gamma_b)?;
    let rho = steady_state_with(&model, opts)?;
    let a = annihilation(&space, 0)?;
    let mean = rho.expectation(&a)?;
    let number = rho.expectation(&a.adjoint().mul(&a)?)?.re - mean.norm_sqr();
    let anomalous = rho.expectation(&a.mul(&a)?)? - mean * mean;
    let var_x2 = rho.variance(&quadrature(&space, 0, std::f64::consts::FRAC_PI_2)?)?;
    let pa = rho.number_distribution(0)?;
    let pb = rho.number_distribution(1)?;
    Ok(LindbladMoments {
        moments: SignalMoments { number, anomalous },
        var_x2,
        edge_population: [pa[dims[0] - 1], pb[dims[1] - 1]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(kappa: f64, e0: f64) -> DpoParams {
        DpoParams::new(kappa, e0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn branches_by_regime() {
        let below = steady_branches(&p(1.0, 0.5)).unwrap();
        assert_eq!(below.len(), 1);
        assert_eq!(below[0].beta0, C64::new(0.5, 0.0));

        let q = DpoParams::new(0.5, 4.0, 0.7, 1.3).unwrap();
        let above = steady_branches(&q).unwrap();
        assert_eq!(above.len(), 3);
        let mag = 2f64.sqrt() / 0.5 * (2.0f64 - 0.91).sqrt();
        assert!((above[1].alpha0.re - mag).abs() < 1e-14);
        assert!((above[2].alpha0.re + mag).abs() < 1e-14);
        for b in &above {
            assert!(b.residual(&q) < 1e-12, "{:?}", b.branch);
        }

        let at = steady_branches(&p(1.0, 1.0)).unwrap();
        assert_eq!(at.len(), 3);
        assert_eq!(at[1].alpha0, C64::new(0.0, 0.0));
        assert_eq!(at[1].alpha0, at[2].alpha0.conj());
    }

    #[test]
    fn below_threshold_stability() {
        let params = p(1.0, 0.5);
        let b = steady_branches(&params).unwrap()[0];
        let st = stability_eigenvalues(&params, &b).unwrap();
        let expect = [-1.5, -1.0, -1.0, -0.5];
        for (l, e) in st.eigenvalues.iter().zip(expect) {
            assert!((l - C64::new(e, 0.0)).norm() < 1e-9, "{l} vs {e}");
        }
        assert!(st.stable);
        assert!(st.polynomial_residual < 1e-9);

        let over = p(1.0, 1.5);
        let st = stability_eigenvalues(&over, &steady_branches(&over).unwrap()[0]).unwrap();
        assert!(!st.stable);
    }

    #[test]
    fn above_threshold_stability() {
        for e0 in [1.2, 2.0, 5.0] {
            let params = DpoParams::new(0.8, e0, 0.6, 1.1).unwrap();
            let branches = steady_branches(&params).unwrap();
            let closed = above_threshold_eigenvalues(&params);
            for b in &branches[1..] {
                let st = stability_eigenvalues(&params, b).unwrap();
                assert!(st.stable);
                assert!(st.polynomial_residual < 1e-9);
                for c in &closed {
                    let d = st.eigenvalues.iter().map(|l| (l - c).norm()).fold(f64::INFINITY, f64::min);
                    assert!(d < 1e-9, "{c} not among {:?}", st.eigenvalues);
                }
            }
            assert!(!stability_eigenvalues(&params, &branches[0]).unwrap().stable);
        }
    }

    #[test]
    fn moments_and_squeezing() {
        let m = below_threshold_moments(&p(1.0, 0.5)).unwrap();
        assert!((m.number - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.anomalous.re - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.var_x2() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(below_threshold_moments(&p(1.0, 0.0)).unwrap().number, 0.0);
        assert!((below_threshold_squeezing(&p(1.0, 0.5)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(below_threshold_squeezing(&p(1.0, 0.0)).unwrap(), 0.25);
        assert!(matches!(below_threshold_moments(&p(1.0, 1.0)), Err(Error::Domain(_))));
        assert_eq!(squeezing_threshold_limit(0.3, 1.7).unwrap(), 0.125);
        let near = below_threshold_squeezing(&p(1.0, 1.0 - 1e-8)).unwrap();
        assert!((near - 0.125).abs() < 1e-8);
    }

    #[test]
    fn squeezing_agrees_with_moment_form() {
        for r in [0.1, 0.4, 0.8, 0.95] {
            let q = DpoParams::new(2.0, r * 0.35 / 2.0, 0.5, 0.7).unwrap();
            let m = below_threshold_moments(&q).unwrap();
            assert!((m.var_x2() - below_threshold_squeezing(&q).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn lindblad_small_drive() {
        let q = DpoParams::new(0.2, 1.0, 1.0, 1.0).unwrap();
        let got = lindblad_moments(&q, [12, 6], &SteadyOptions::default()).unwrap();
        let lin = below_threshold_moments(&q).unwrap();
        assert!((got.moments.number - lin.number).abs() < 0.1 * lin.number);
        assert!((got.var_x2 - below_threshold_squeezing(&q).unwrap()).abs() < 0.01);
    }
}
