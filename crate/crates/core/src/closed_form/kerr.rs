use num_complex::Complex64 as C64;
use serde::Serialize;

/// `|α|φ` beyond which the small-φ expansion behind the beam-splitter scheme
/// is flagged.
pub const KERR_BS_VALIDITY: f64 = 3.0;

/// `⟨a(t)⟩ = α e^{-iωt} exp[-|α|²(1 - e^{-iκt})]` for a Kerr medium
/// started in `|α⟩`.
pub fn kerr_mean_amplitude(alpha: C64, omega: f64, kappa: f64, t: f64) -> C64 {
    let kt = kappa * t;
    let inner = C64::new(1.0 - kt.cos(), kt.sin());
    alpha * C64::from_polar(1.0, -omega * t) * (-alpha.norm_sqr() * inner).exp()
}

/// Short-time Gaussian form `α e^{-it(ω + κ|α|²)} e^{-(κt|α|²)²/2}`.
pub fn kerr_mean_amplitude_gaussian(alpha: C64, omega: f64, kappa: f64, t: f64) -> C64 {
    let n = alpha.norm_sqr();
    alpha * C64::from_polar((-(kappa * t * n).powi(2) / 2.0).exp(), -t * (omega + kappa * n))
}

/// Coherent amplitude after cross-Kerr evolution against `n_b` photons:
/// `α(t) = exp{-it[ω₁ + n_b κ/2]} α`.
pub fn qnd_phase_shift(alpha: C64, omega1: f64, kappa: f64, n_b: u32, t: f64) -> C64 {
    alpha * C64::from_polar(1.0, -t * (omega1 + n_b as f64 * kappa / 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KerrBsExcess {
    pub excess: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn validity_warning(alpha_mag: f64, phi: f64) -> Option<String> {
    let x = alpha_mag * phi;
    (x > KERR_BS_VALIDITY).then(|| format!("|α|φ = {x:.3} lies outside the small-φ expansion (> {KERR_BS_VALIDITY})"))
}

/// `(Δn)²_out - ⟨n̂_out⟩` after mixing Kerr output `|α|e^{iθ}`, `φ = κt`, with
/// a strong coherent beam so that `√R β = r e^{iη}`:
///
/// `-4rφ|α|³ e^{-x²/2} sin ψ + 2r²|α|²(1 - e^{-x²})(1 - e^{-x²} cos 2ψ)`
///
/// with `x = |α|φ` and `ψ = η - θ + |α|²φ`.
pub fn kerr_bs_excess(alpha_mag: f64, theta: f64, phi: f64, r: f64, eta: f64) -> KerrBsExcess {
    let a = alpha_mag;
    let x2 = (a * phi).powi(2);
    let psi = eta - theta + a * a * phi;
    let first = -4.0 * r * phi * a.powi(3) * (-x2 / 2.0).exp() * psi.sin();
    let second = 2.0 * r * r * a * a * (1.0 - (-x2).exp()) * (1.0 - (-x2).exp() * (2.0 * psi).cos());
    KerrBsExcess {
        excess: first + second,
        warning: validity_warning(alpha_mag, phi),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KerrBsOptimum {
    /// `-2|α|³φ e^{-x²}/(1 - e^{-2x²})`, the published optimum
    pub excess: f64,
    /// Minimum of the two-term excess over `r` at `ψ = π/2`,
    /// `-2φ²|α|⁴ e^{-x²}/(1 - e^{-2x²})`; equals `excess` at `x = 1`
    pub excess_minimized: f64,
    pub r_opt: f64,
    /// `η` that sets `ψ = π/2` for `θ = 0`
    pub eta_opt: f64,
    /// `|α|² + |α|φ e^{-x²/2}/(1 - e^{-2x²})`
    pub mean_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn kerr_bs_optimum(alpha_mag: f64, phi: f64) -> KerrBsOptimum {
    let a = alpha_mag;
    let x = a * phi;
    let denom = 1.0 - (-2.0 * x * x).exp();
    KerrBsOptimum {
        excess: -2.0 * a.powi(3) * phi * (-x * x).exp() / denom,
        excess_minimized: -2.0 * phi * phi * a.powi(4) * (-x * x).exp() / denom,
        r_opt: phi * a * (-x * x / 2.0).exp() / denom,
        eta_opt: std::f64::consts::FRAC_PI_2 - a * a * phi,
        mean_n: a * a + x * (-x * x / 2.0).exp() / denom,
        warning: validity_warning(alpha_mag, phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mean_amplitude_limits() {
        let alpha = C64::new(1.5, 0.5);
        let v = kerr_mean_amplitude(alpha, 0.7, 0.0, 2.0);
        assert!((v - alpha * C64::from_polar(1.0, -1.4)).norm() < 1e-15);
        let t = 2.0 * PI / 0.3;
        let v = kerr_mean_amplitude(alpha, 0.7, 0.3, t);
        assert!((v - alpha * C64::from_polar(1.0, -0.7 * t)).norm() < 1e-10);
        // the Gaussian form tracks the exact one at short times
        let (e, g) = (
            kerr_mean_amplitude(alpha, 0.0, 1e-3, 1.0),
            kerr_mean_amplitude_gaussian(alpha, 0.0, 1e-3, 1.0),
        );
        assert!((e - g).norm() < 1e-5);
    }

    #[test]
    fn qnd_shift_per_photon() {
        let alpha = C64::new(0.8, 0.1);
        assert_eq!(qnd_phase_shift(alpha, 1.0, 0.4, 0, 2.0), alpha * C64::from_polar(1.0, -2.0));
        let ratio = qnd_phase_shift(alpha, 1.0, 0.4, 3, 2.0) / qnd_phase_shift(alpha, 1.0, 0.4, 4, 2.0);
        assert!((ratio - C64::from_polar(1.0, 0.4)).norm() < 1e-14);
    }

    #[test]
    fn beam_splitter_scheme() {
        assert_eq!(kerr_bs_excess(4.0, 0.0, 0.25, 0.0, 1.0).excess, 0.0);
        let opt = kerr_bs_optimum(4.0, 0.25);
        assert!((opt.excess - opt.excess_minimized).abs() < 1e-12);
        let at_opt = kerr_bs_excess(4.0, 0.0, 0.25, opt.r_opt, opt.eta_opt).excess;
        assert!((at_opt - opt.excess_minimized).abs() < 1e-12);
        for dr in [-0.05, 0.05] {
            assert!(kerr_bs_excess(4.0, 0.0, 0.25, opt.r_opt + dr, opt.eta_opt).excess > at_opt);
        }
        let x = 1.0f64;
        let printed = -2.0 * 64.0 * 0.25 * (-x * x).exp() / (1.0 - (-2.0 * x * x).exp());
        assert!((opt.excess - printed).abs() < 1e-12);
        assert!(opt.warning.is_none());
        assert!(kerr_bs_optimum(10.0, 0.5).warning.is_some());
    }
}
