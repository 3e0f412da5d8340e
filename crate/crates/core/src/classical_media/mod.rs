//! Semiclassical two-level susceptibilities, classical frequency mixing, and
//! the dispersion relation of a quantized dispersive medium. SI units.

use serde::Serialize;

use crate::error::{ensure_param, Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON0: f64 = 8.854_187_812_8e-12;
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Relative agreement demanded between the two expressions for `A_k`.
pub const MODE_NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct TwoLevelParams {
    /// Detuning `Δ = ω₀ - ν`
    pub delta: f64,
    /// Coupling times field, `g|E₀|`
    pub g_e: f64,
    /// Atoms per m³
    pub n_density: f64,
    pub g: f64,
}

impl TwoLevelParams {
    fn field(&self) -> f64 {
        self.g_e / self.g
    }
}

/// Roots `μ± = [-Δ ± (Δ² + 4(gE)²)^{1/2}]/2` of `μ² + Δμ - (gE)² = 0`,
/// evaluated without cancellation.
pub fn two_level_mu(p: &TwoLevelParams) -> (f64, f64) {
    let x = p.g_e * p.g_e;
    let d = p.delta;
    let s = (d * d + 4.0 * x).sqrt();
    if d > 0.0 {
        (2.0 * x / (d + s), -(d + s) / 2.0)
    } else if d < 0.0 {
        ((s - d) / 2.0, -2.0 * x / (s - d))
    } else {
        (p.g_e.abs(), -p.g_e.abs())
    }
}

/// `μ² + Δμ - (gE)²`
pub fn two_level_mu_residual(p: &TwoLevelParams, mu: f64) -> f64 {
    mu * mu + p.delta * mu - p.g_e * p.g_e
}

/// Coefficient `-nħg²μ/((gE)² + μ²)` multiplying `E₀*e^{iνt} + E₀e^{-iνt}`,
/// where `μ` is the root that vanishes with the field (the atom adiabatically
/// follows its ground state): `μ₊` for `Δ ≥ 0`, `μ₋` for `Δ < 0`.
pub fn two_level_polarization(p: &TwoLevelParams) -> Result<f64> {
    let x = p.g_e * p.g_e;
    let sign = if p.delta < 0.0 { -1.0 } else { 1.0 };
    // μ = 2x/t, so μ/(x + μ²) = 2t/(t² + 4x)
    let t = p.delta + sign * (p.delta * p.delta + 4.0 * x).sqrt();
    let den = t * t + 4.0 * x;
    if den == 0.0 {
        return Err(Error::Domain("polarization is singular at zero detuning and zero field".into()));
    }
    Ok(-p.n_density * HBAR * p.g * p.g * 2.0 * t / den)
}

/// Third-order expansion `n(-ħg²/Δ + 2ħg⁴|E₀|²/Δ³)` of the polarization
/// coefficient.
pub fn two_level_polarization_series(p: &TwoLevelParams) -> Result<f64> {
    ensure_nonresonant(p.delta)?;
    let e2 = p.field().powi(2);
    Ok(p.n_density * (-HBAR * p.g * p.g / p.delta + 2.0 * HBAR * p.g.powi(4) * e2 / p.delta.powi(3)))
}

fn ensure_nonresonant(delta: f64) -> Result<()> {
    if delta == 0.0 || !delta.is_finite() {
        Err(Error::Domain(format!("susceptibility is singular at Δ = {delta}")))
    } else {
        Ok(())
    }
}

/// `χ⁽¹⁾ = -ħg²/(ε₀Δ)`
pub fn chi1_two_level(p: &TwoLevelParams) -> Result<f64> {
    ensure_nonresonant(p.delta)?;
    Ok(-HBAR * p.g * p.g / (EPSILON0 * p.delta))
}

/// `χ⁽³⁾(-ν, ν, ν) = ħg⁴/(3πε₀Δ³)`
pub fn chi3_two_level(p: &TwoLevelParams) -> Result<f64> {
    ensure_nonresonant(p.delta)?;
    Ok(HBAR * p.g.powi(4) / (3.0 * std::f64::consts::PI * EPSILON0 * p.delta.powi(3)))
}

/// `χ⁽¹⁾ + (3/4)χ⁽³⁾E₀²`
pub fn effective_chi_kerr(chi1: f64, chi3: f64, e0: f64) -> f64 {
    chi1 + 0.75 * chi3 * e0 * e0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ToneKind {
    Dc,
    SecondHarmonic,
    Sum,
    Difference,
}

/// One `amplitude · cos(frequency · t)` component of the nonlinear polarization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tone {
    pub frequency: f64,
    pub amplitude: f64,
    pub kind: ToneKind,
    /// Indices of the input tones that produced it
    pub sources: (usize, usize),
}

/// Output tones of `P_nl = ε₀χ⁽²⁾E(t)²` for `E(t) = Σ E_i cos ω_i t`, given as
/// `(ω_i, E_i)` pairs. Difference frequencies are reported as `|ω_i - ω_j|`.
pub fn chi2_mixing_spectrum(inputs: &[(f64, f64)], chi2: f64) -> Vec<Tone> {
    if chi2 == 0.0 {
        return Vec::new();
    }
    let c = EPSILON0 * chi2;
    let mut out = Vec::new();
    for (i, &(wi, ei)) in inputs.iter().enumerate() {
        let a = c * ei * ei / 2.0;
        out.push(Tone { frequency: 0.0, amplitude: a, kind: ToneKind::Dc, sources: (i, i) });
        out.push(Tone { frequency: 2.0 * wi, amplitude: a, kind: ToneKind::SecondHarmonic, sources: (i, i) });
    }
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            let ((wi, ei), (wj, ej)) = (inputs[i], inputs[j]);
            let a = c * ei * ej;
            out.push(Tone { frequency: wi + wj, amplitude: a, kind: ToneKind::Sum, sources: (i, j) });
            out.push(Tone { frequency: (wi - wj).abs(), amplitude: a, kind: ToneKind::Difference, sources: (i, j) });
        }
    }
    out
}

/// `Σ amplitude · cos(frequency · t)`
pub fn synthesize(tones: &[Tone], t: f64) -> f64 {
    tones.iter().map(|x| x.amplitude * (x.frequency * t).cos()).sum()
}

/// Coefficients of `β⁽¹⁾(ω) ≅ β_ν + ωβ'_ν + ω²β''_ν/2` and `μ₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct DispersionCoeffs {
    pub beta_nu: f64,
    pub beta_nu_prime: f64,
    pub beta_nu_dblprime: f64,
    pub mu0: f64,
}

impl DispersionCoeffs {
    /// `β⁽¹⁾(ω)` from the quadratic expansion.
    pub fn beta(&self, omega: f64) -> f64 {
        self.beta_nu + omega * self.beta_nu_prime + 0.5 * omega * omega * self.beta_nu_dblprime
    }

    pub fn dbeta(&self, omega: f64) -> f64 {
        self.beta_nu_prime + omega * self.beta_nu_dblprime
    }

    /// `μ₀ - β''k²/2`
    fn denominator(&self, k: f64) -> f64 {
        self.mu0 - 0.5 * self.beta_nu_dblprime * k * k
    }

    /// `k⁴β'²/4 + (μ₀ - β''k²/2)k²β`
    fn radicand(&self, k: f64) -> f64 {
        0.25 * k.powi(4) * self.beta_nu_prime.powi(2) + self.denominator(k) * k * k * self.beta_nu
    }

    fn check(&self, k: f64) -> Result<(f64, f64)> {
        ensure_param(k.is_finite() && self.mu0 > 0.0, || "k must be finite and μ₀ positive".into())?;
        let d = self.denominator(k);
        if d <= 0.0 {
            return Err(Error::Domain(format!("μ₀ - β''k²/2 = {d:.3e} ≤ 0 at k = {k:.6e}")));
        }
        let r = self.radicand(k);
        if r <= 0.0 {
            return Err(Error::Domain(format!("mode-norm radicand {r:.3e} ≤ 0 at k = {k:.6e}")));
        }
        Ok((d, r))
    }
}

/// `ω±(k) = [±k²β'/2 + R^{1/2}]/(μ₀ - β''k²/2)`.
pub fn dispersion_omega(k: f64, c: &DispersionCoeffs) -> Result<(f64, f64)> {
    let (d, r) = c.check(k)?;
    let half = 0.5 * k * k * c.beta_nu_prime;
    let s = r.sqrt();
    Ok(((half + s) / d, (-half + s) / d))
}

/// Relative residual of `μ₀ω² = k²(β ± ωβ' + ω²β''/2)` for the chosen sign.
pub fn dispersion_residual(k: f64, omega: f64, plus: bool, c: &DispersionCoeffs) -> f64 {
    let sgn = if plus { 1.0 } else { -1.0 };
    let lhs = c.mu0 * omega * omega;
    let rhs = k * k * (c.beta_nu + sgn * omega * c.beta_nu_prime + 0.5 * omega * omega * c.beta_nu_dblprime);
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
}

/// `dω₊/dk` from differentiating the closed-form root.
pub fn group_velocity(k: f64, c: &DispersionCoeffs) -> Result<f64> {
    let (d, r) = c.check(k)?;
    let s = r.sqrt();
    let dd = -c.beta_nu_dblprime * k;
    let dr = k.powi(3) * c.beta_nu_prime.powi(2) + dd * k * k * c.beta_nu + 2.0 * d * k * c.beta_nu;
    let num = 0.5 * k * k * c.beta_nu_prime + s;
    let dnum = k * c.beta_nu_prime + dr / (2.0 * s);
    Ok((dnum * d - num * dd) / (d * d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeNorm {
    /// `[k⁴β'²/4 + (μ₀ - β''k²/2)k²β]^{1/4}`
    pub a_k: f64,
    /// `(kβ⁽¹⁾(ω₊)/v_k)^{1/2}`
    pub a_k_group: f64,
    /// `ω₊(μ₀ - k²β''/2) - k²β'/2`, which equals `A_k²`
    pub a_k_squared_alt: f64,
    pub v_k: f64,
    pub omega_plus: f64,
}

pub fn mode_norm_ak(k: f64, c: &DispersionCoeffs) -> Result<ModeNorm> {
    let (d, r) = c.check(k)?;
    let a_k = r.powf(0.25);
    let (omega_plus, _) = dispersion_omega(k, c)?;
    let v_k = group_velocity(k, c)?;
    let a_k_group = (k * c.beta(omega_plus) / v_k).sqrt();
    let rel = (a_k - a_k_group).abs() / a_k;
    if !(rel < MODE_NORM_TOL) {
        return Err(Error::Invariant(format!(
            "mode normalization forms disagree at k = {k:.6e}: {a_k:.15e} vs {a_k_group:.15e}"
        )));
    }
    Ok(ModeNorm {
        a_k,
        a_k_group,
        a_k_squared_alt: omega_plus * d - 0.5 * k * k * c.beta_nu_prime,
        v_k,
        omega_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn glass() -> DispersionCoeffs {
        // ε ≈ 2.25 ε₀ around ω ~ 1e15 rad/s with mild dispersion
        let beta = 1.0 / (2.25 * EPSILON0);
        DispersionCoeffs {
            beta_nu: beta,
            beta_nu_prime: 0.03 * beta / 1.2e15,
            beta_nu_dblprime: 0.01 * beta / 1.2e15f64.powi(2),
            mu0: MU0,
        }
    }

    fn tl(delta: f64, g_e: f64) -> TwoLevelParams {
        TwoLevelParams { delta, g_e, n_density: 1e24, g: 1e4 }
    }

    #[test]
    fn mu_roots() {
        assert_eq!(two_level_mu(&tl(0.0, 0.3)), (0.3, -0.3));
        let p = tl(1.0, 0.1);
        let (mp, mm) = two_level_mu(&p);
        assert!((mp - 0.009_901_951_359_278_4).abs() < 1e-15);
        assert!((mp * mm + 0.01).abs() < 1e-14);
        assert!((mp + mm + 1.0).abs() < 1e-14);
        for d in [-3.0, -0.2, 0.7, 5.0] {
            let q = tl(d, 0.4);
            let (a, b) = two_level_mu(&q);
            assert!(two_level_mu_residual(&q, a).abs() < 1e-12);
            assert!(two_level_mu_residual(&q, b).abs() < 1e-12);
        }
        assert!(two_level_mu(&tl(2.0, 1e-9)).0 < 1e-17);
    }

    #[test]
    fn polarization_limits() {
        let p = tl(2e9, 0.0);
        let zero_field = two_level_polarization(&p).unwrap();
        assert!((zero_field + p.n_density * HBAR * p.g * p.g / p.delta).abs() < 1e-15 * zero_field.abs());
        assert!(zero_field < 0.0);
        assert!(two_level_polarization(&tl(-2e9, 0.0)).unwrap() > 0.0);
        assert!(matches!(two_level_polarization(&tl(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn susceptibility_formulas() {
        let p = tl(1e9, 0.0);
        let (c1, c3) = (chi1_two_level(&p).unwrap(), chi3_two_level(&p).unwrap());
        assert_eq!(chi1_two_level(&tl(-1e9, 0.0)).unwrap(), -c1);
        let q = tl(2e9, 0.0);
        assert!((chi3_two_level(&q).unwrap() / c3 - 0.125).abs() < 1e-15);
        let mut h = p;
        h.g *= 3.7;
        let ratio = |x: &TwoLevelParams| chi3_two_level(x).unwrap() / chi1_two_level(x).unwrap().powi(2);
        assert!((ratio(&h) / ratio(&p) - 1.0).abs() < 1e-14);
        assert!(matches!(chi1_two_level(&tl(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn kerr_estimate() {
        assert!((effective_chi_kerr(0.0, 4e-24, 1e8) - 3e-8).abs() < 1e-22);
        assert_eq!(effective_chi_kerr(1.2, 4e-24, 0.0), 1.2);
    }

    #[test]
    fn mixing_tones_reconstruct_the_square() {
        let chi2 = 2e-12;
        assert!(chi2_mixing_spectrum(&[(1.0, 1.0)], 0.0).is_empty());
        let one = chi2_mixing_spectrum(&[(3.0, 2.0)], chi2);
        assert_eq!(one.len(), 2);
        assert_eq!(one[0].amplitude, EPSILON0 * chi2 * 2.0);
        assert_eq!(one[1].frequency, 6.0);

        let inputs = [(2.0, 1.5), (0.7, -0.4)];
        let tones = chi2_mixing_spectrum(&inputs, chi2);
        assert_eq!(tones.len(), 6);
        for i in 0..200 {
            let t = i as f64 * 0.037;
            let e: f64 = inputs.iter().map(|(w, a)| a * (w * t).cos()).sum();
            let direct = EPSILON0 * chi2 * e * e;
            assert!((synthesize(&tones, t) - direct).abs() < 1e-12 * EPSILON0 * chi2);
        }
    }

    #[test]
    fn nondispersive_light_cone() {
        let c = DispersionCoeffs { beta_nu: 1.0 / EPSILON0, beta_nu_prime: 0.0, beta_nu_dblprime: 0.0, mu0: MU0 };
        let (wp, wm) = dispersion_omega(1e7, &c).unwrap();
        let expect = 1e7 * (c.beta_nu / MU0).sqrt();
        assert!((wp / expect - 1.0).abs() < 1e-14);
        assert_eq!(wp, wm);
        let n = mode_norm_ak(1e7, &c).unwrap();
        assert!((n.a_k / (MU0 * 1e14 * c.beta_nu).powf(0.25) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dispersive_roots_and_norms() {
        let c = glass();
        for i in 0..50 {
            let k = 2e6 + i as f64 * 2e5;
            let (wp, wm) = dispersion_omega(k, &c).unwrap();
            assert!(dispersion_residual(k, wp, true, &c) < 1e-12);
            assert!(dispersion_residual(k, wm, false, &c) < 1e-12);
            assert!(wp > wm);
            let n = mode_norm_ak(k, &c).unwrap();
            assert!((n.a_k_squared_alt / n.a_k.powi(2) - 1.0).abs() < 1e-10);
            let h = 1e-6 * k;
            let fd = (dispersion_omega(k + h, &c).unwrap().0 - dispersion_omega(k - h, &c).unwrap().0) / (2.0 * h);
            assert!((fd / n.v_k - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn polarization_series_error_is_fifth_order() {
        for delta in [3e9, -3e9] {
            let pts: Vec<(f64, f64)> = (0..11)
                .map(|i| {
                    let e = 1e4 * 10f64.powf(i as f64 / 10.0);
                    let p = TwoLevelParams { delta, g_e: 1e4 * e, n_density: 1e24, g: 1e4 };
                    let diff = (two_level_polarization(&p).unwrap() - two_level_polarization_series(&p).unwrap()) * e;
                    (e.ln(), diff.abs().ln())
                })
                .collect();
            let n = pts.len() as f64;
            let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
            let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
            let slope = sxy / sxx;
            assert!((slope - 5.0).abs() < 0.3, "slope {slope}");
        }
    }

    #[test]
    fn denominator_guard() {
        let mut c = glass();
        c.beta_nu_dblprime = 1.0;
        assert!(matches!(dispersion_omega(1e7, &c), Err(Error::Domain(_))));
    }
}
