use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{ensure_param, Error, Result};

/// `Π_j 2 sin(k_j l_j / 2)/k_j`, each factor tending to `l_j` as `k_j → 0`.
pub fn phase_match_h(dk: [f64; 3], l: [f64; 3]) -> f64 {
    dk.iter()
        .zip(&l)
        .map(|(&k, &l)| {
            let x = k * l;
            if x.abs() < 1e-4 {
                l * (1.0 - x * x / 24.0)
            } else {
                2.0 * (x / 2.0).sin() / k
            }
        })
        .product()
}

/// Pair-correlation kernel at `ΔZ = (z₂ - z₁) - c(t₂' - t₁')`, overall
/// constant dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelPoint {
    pub delta_z: f64,
    pub k0: f64,
    /// `2i(1 - e^{ik₀ΔZ})/ΔZ³ - k₀(1 + e^{ik₀ΔZ})/ΔZ²`
    pub value: C64,
    /// The exchanged branch `e^{ik₀ΔZ} · value(-ΔZ)`, referred to the same
    /// overall phase as `value`
    pub exchanged: C64,
}

impl KernelPoint {
    pub fn symmetrized(&self) -> C64 {
        self.value + self.exchanged
    }
}

/// `k₀³ Σ_p (ix)^p (p+1)/(p+3)!` with `x = k₀ΔZ`, used for `|x| < 1`.
fn bracket_series(delta_z: f64, k0: f64) -> C64 {
    let x = k0 * delta_z;
    let ix = C64::new(0.0, x);
    let mut pow = C64::new(1.0, 0.0);
    let mut fact = 6.0; // (p+3)! at p = 0
    let mut sum = C64::new(0.0, 0.0);
    for p in 0..40 {
        let term = pow * ((p + 1) as f64 / fact);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        pow *= ix;
        fact *= (p + 4) as f64;
    }
    sum * k0.powi(3)
}

fn bracket(delta_z: f64, k0: f64) -> C64 {
    if (k0 * delta_z).abs() < 1.0 {
        return bracket_series(delta_z, k0);
    }
    let e = C64::from_polar(1.0, k0 * delta_z);
    let i2 = C64::new(0.0, 2.0);
    i2 * (1.0 - e) / delta_z.powi(3) - k0 * (1.0 + e) / delta_z.powi(2)
}

pub fn downconv_kernel(delta_z: f64, k0: f64) -> Result<KernelPoint> {
    ensure_param(k0 > 0.0 && k0.is_finite(), || format!("k0 must be positive, got {k0}"))?;
    ensure_param(delta_z.is_finite(), || "ΔZ must be finite".into())?;
    Ok(KernelPoint {
        delta_z,
        k0,
        value: bracket(delta_z, k0),
        exchanged: C64::from_polar(1.0, k0 * delta_z) * bracket(-delta_z, k0),
    })
}

/// Decay exponent of `|value|` at large `ΔZ`, fitted by least squares on the
/// local maxima of `|value|` in log-log coordinates over `[z_min, z_max]`.
pub fn envelope_decay_exponent(k0: f64, z_min: f64, z_max: f64, samples: usize) -> Result<f64> {
    ensure_param(z_min > 0.0 && z_max > z_min && samples >= 16, || {
        "decay fit needs 0 < z_min < z_max and at least 16 samples".into()
    })?;
    let zs: Vec<f64> = (0..samples)
        .map(|i| z_min * (z_max / z_min).powf(i as f64 / (samples - 1) as f64))
        .collect();
    let mags: Vec<f64> = zs
        .iter()
        .map(|&z| downconv_kernel(z, k0).map(|p| p.value.norm()))
        .collect::<Result<_>>()?;
    let peaks: Vec<(f64, f64)> = (1..samples - 1)
        .filter(|&i| mags[i] >= mags[i - 1] && mags[i] >= mags[i + 1] && mags[i] > 0.0)
        .map(|i| (zs[i].ln(), mags[i].ln()))
        .collect();
    if peaks.len() < 3 {
        return Err(Error::Numeric(format!(
            "only {} envelope maxima found; sample the oscillation more finely",
            peaks.len()
        )));
    }
    let n = peaks.len() as f64;
    let (sx, sy) = peaks.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = peaks
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    Ok(-sxy / sxx)
}

/// Brute-force counterpart of the kernel: detectors on the pump axis, the
/// idler momentum fixed by momentum conservation, and the energy delta
/// replaced by a Gaussian of width `sigma` (in units of `k₀`). Integrates
/// over the signal momentum `(k⊥, k_z)` on a `n_perp × n_z` grid in
/// cylindrical coordinates. The overall constant differs from the
/// closed form.
pub fn downconv_kernel_oracle(delta_z: &[f64], k0: f64, sigma: f64, n_perp: usize, n_z: usize) -> Result<Vec<C64>> {
    ensure_param(k0 > 0.0 && sigma > 0.0 && n_perp >= 4 && n_z >= 4, || {
        "oracle needs k0 > 0, sigma > 0 and grids of at least 4 points".into()
    })?;
    let width = sigma * k0;
    let dz = k0 / n_z as f64;
    // the shell |k₁| + |k₀ẑ - k₁| = k₀ + 6σ bounds the transverse extent
    let e_max = 6.0 * width;
    let q_max = ((k0 + e_max).powi(2) / 4.0 - k0 * k0 / 4.0).sqrt() * 2.0;
    let dq = q_max / n_perp as f64;
    let norm = 1.0 / (width * (2.0 * std::f64::consts::PI).sqrt());
    let mut weights = Vec::with_capacity(n_perp * n_z);
    for iz in 0..n_z {
        let s = (iz as f64 + 0.5) * dz;
        for iq in 0..n_perp {
            let q = (iq as f64 + 0.5) * dq;
            let k1 = (s * s + q * q).sqrt();
            let k2 = ((k0 - s).powi(2) + q * q).sqrt();
            if k1 >= k0 || k2 >= k0 {
                continue;
            }
            let mismatch = k1 + k2 - k0;
            let w = norm * (-(mismatch * mismatch) / (2.0 * width * width)).exp() * 2.0 * std::f64::consts::PI * q * dq * dz;
            weights.push((s, w));
        }
    }
    Ok(delta_z
        .iter()
        .map(|&d| weights.iter().map(|&(s, w)| C64::from_polar(w, s * d)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_match_limits() {
        let l = [1.0, 2.0, 3.0];
        assert!((phase_match_h([0.0; 3], l) - 6.0).abs() < 1e-15);
        assert!(phase_match_h([2.0 * std::f64::consts::PI, 0.3, 0.1], l).abs() < 1e-14);
        for dk in [[0.3, -1.1, 2.0], [1e-6, 4.0, -0.2]] {
            let neg = [-dk[0], -dk[1], -dk[2]];
            assert_eq!(phase_match_h(dk, l), phase_match_h(neg, l));
        }
        // continuity across the small-argument switch
        for k in [0.99e-4, 1.01e-4] {
            let h = phase_match_h([k, 0.0, 0.0], [1.0, 1.0, 1.0]);
            assert!((h - 2.0 * (k / 2.0).sin() / k).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_limit_and_continuity() {
        let k0 = 2.5;
        let at0 = downconv_kernel(0.0, k0).unwrap().value;
        assert!((at0 - C64::new(k0.powi(3) / 6.0, 0.0)).norm() < 1e-15);
        for k in 2..7 {
            let eps = 10f64.powi(-k) / k0;
            let v = downconv_kernel(eps, k0).unwrap().value;
            assert!((v - at0).norm() < 2.0 * k0.powi(3) * eps * k0);
        }
        // the series and the closed form meet at |k₀ΔZ| = 1
        for z in [0.999 / k0, 1.001 / k0, -1.001 / k0] {
            let closed = {
                let e = C64::from_polar(1.0, k0 * z);
                C64::new(0.0, 2.0) * (1.0 - e) / z.powi(3) - k0 * (1.0 + e) / z.powi(2)
            };
            assert!((bracket_series(z, k0) - closed).norm() < 1e-9 * k0.powi(3));
        }
    }

    #[test]
    fn exchanged_branch_equals_direct() {
        for z in [-3.0, -0.2, 0.0, 0.7, 5.5] {
            let p = downconv_kernel(z, 1.7).unwrap();
            assert!((p.value - p.exchanged).norm() < 1e-12 * p.value.norm().max(1.0));
        }
    }

    #[test]
    fn envelope_falls_as_inverse_square() {
        let e = envelope_decay_exponent(1.0, 50.0, 5000.0, 200_000).unwrap();
        assert!((e - 2.0).abs() < 0.1, "exponent {e}");
    }

    #[test]
    fn oracle_peaks_at_zero() {
        let zs: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.5).collect();
        let g = downconv_kernel_oracle(&zs, 1.0, 0.01, 200, 200).unwrap();
        let imax = (0..zs.len()).max_by(|&a, &b| g[a].norm().partial_cmp(&g[b].norm()).unwrap()).unwrap();
        assert_eq!(zs[imax], 0.0);
    }
}
