//! Scenario configuration: one TOML table per command, unknown keys rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ensure_param, Error, Result};
use crate::validation::{sample_medium, CRITERIA};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Recorded in every output; sweeps are evaluated in a fixed order, so it
    /// does not change results.
    pub seed: Option<u64>,
    pub squeeze: Option<SqueezeConfig>,
    pub entangle: Option<EntangleConfig>,
    pub kerr: Option<KerrConfig>,
    pub oscillator: Option<OscillatorConfig>,
    pub nphoton: Option<NphotonConfig>,
    pub medium: Option<MediumConfig>,
    pub dispersion: Option<DispersionConfig>,
    pub downconv: Option<DownconvConfig>,
    pub soliton: Option<SolitonConfig>,
    pub validate: Option<ValidateConfig>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parameter(format!("config: {}", e.message())))
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqueezeConfig {
    pub np: Vec<f64>,
    pub phi_p: f64,
    pub u_max: f64,
    pub u_points: usize,
    /// Also run the two-mode Fock evolution at `simulate_np`
    pub simulate: bool,
    pub simulate_np: f64,
    pub dims: [usize; 2],
    pub simulate_u_max: f64,
    pub simulate_points: usize,
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        Self {
            np: vec![1e2, 1e4, 1e6],
            phi_p: 0.0,
            u_max: 4.0,
            u_points: 81,
            simulate: false,
            simulate_np: 400.0,
            dims: [40, 60],
            simulate_u_max: 0.5,
            simulate_points: 11,
        }
    }
}

impl SqueezeConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_param(!self.np.is_empty(), || "squeeze.np is empty".into())?;
        ensure_param(self.np.iter().chain([&self.simulate_np]).all(|n| *n > 0.0 && n.is_finite()), || {
            "pump photon numbers must be positive".into()
        })?;
        positive("squeeze.u_max", self.u_max)?;
        positive("squeeze.simulate_u_max", self.simulate_u_max)?;
        at_least("squeeze.u_points", self.u_points, 2)?;
        at_least("squeeze.simulate_points", self.simulate_points, 2)?;
        dims_ok("squeeze.dims", &self.dims)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntangleConfig {
    pub points: usize,
}

impl Default for EntangleConfig {
    fn default() -> Self {
        Self { points: 181 }
    }
}

impl EntangleConfig {
    pub fn validate(&self) -> Result<()> {
        at_least("entangle.points", self.points, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KerrConfig {
    pub alpha: f64,
    pub alpha_phase: f64,
    pub omega: f64,
    pub kappa: f64,
    pub dim: usize,
    pub t_max: f64,
    pub samples: usize,
    pub bs_alpha: f64,
    pub bs_phi: f64,
    /// Reference beam amplitude mixed in at the beam splitter
    pub bs_beta: f64,
    pub bs_dims: [usize; 2],
    pub bs_simulate: bool,
}

impl Default for KerrConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            alpha_phase: 0.0,
            omega: 1.0,
            kappa: 1.0,
            dim: 50,
            t_max: 2.0 * std::f64::consts::PI,
            samples: 100,
            bs_alpha: 4.0,
            bs_phi: 0.25,
            bs_beta: 4.5,
            bs_dims: [60, 60],
            bs_simulate: true,
        }
    }
}

impl KerrConfig {
    pub fn validate(&self) -> Result<()> {
        finite("kerr", &[self.alpha, self.alpha_phase, self.omega, self.kappa])?;
        positive("kerr.t_max", self.t_max)?;
        positive("kerr.bs_alpha", self.bs_alpha)?;
        positive("kerr.bs_phi", self.bs_phi)?;
        positive("kerr.bs_beta", self.bs_beta)?;
        at_least("kerr.samples", self.samples, 2)?;
        dims_ok("kerr.dim", &[self.dim])?;
        dims_ok("kerr.bs_dims", &self.bs_dims)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorConfig {
    pub kappa: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub points: usize,
    /// Add Lindblad steady-state moments below threshold (slow)
    pub lindblad: bool,
    pub dims: [usize; 2],
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            gamma_a: 1.0,
            gamma_b: 1.0,
            ratio_min: 0.05,
            ratio_max: 1.0,
            points: 20,
            lindblad: false,
            dims: [25, 15],
        }
    }
}

impl OscillatorConfig {
    pub fn validate(&self) -> Result<()> {
        positive("oscillator.kappa", self.kappa)?;
        positive("oscillator.gamma_a", self.gamma_a)?;
        positive("oscillator.gamma_b", self.gamma_b)?;
        ensure_param(self.ratio_min >= 0.0 && self.ratio_max > self.ratio_min, || {
            "oscillator ratio range must satisfy 0 ≤ ratio_min < ratio_max".into()
        })?;
        at_least("oscillator.points", self.points, 2)?;
        dims_ok("oscillator.dims", &self.dims)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NphotonConfig {
    pub n: usize,
    pub omega: f64,
    pub kappa: f64,
    /// (signal, pump)
    pub dims: [usize; 2],
    pub pump_alpha: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for NphotonConfig {
    fn default() -> Self {
        Self { n: 2, omega: 1.0, kappa: 0.1, dims: [40, 25], pump_alpha: 2.0, t_max: 10.0, samples: 101 }
    }
}

impl NphotonConfig {
    pub fn validate(&self) -> Result<()> {
        at_least("nphoton.n", self.n, 1)?;
        finite("nphoton", &[self.omega, self.kappa, self.pump_alpha])?;
        positive("nphoton.t_max", self.t_max)?;
        at_least("nphoton.samples", self.samples, 2)?;
        dims_ok("nphoton.dims", &self.dims)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumConfig {
    pub delta: f64,
    pub g: f64,
    pub n_density: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
    /// Input tones `[ω, E]` for the χ⁽²⁾ mixing table
    pub tones: Vec<[f64; 2]>,
    pub chi2: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        Self {
            delta: 3e9,
            g: 1e4,
            n_density: 1e24,
            e_min: 1e4,
            e_max: 1e5,
            points: 41,
            tones: Vec::new(),
            chi2: 0.0,
        }
    }
}

impl MediumConfig {
    pub fn validate(&self) -> Result<()> {
        finite("medium", &[self.delta, self.g, self.n_density, self.chi2])?;
        ensure_param(self.g != 0.0, || "medium.g must be nonzero".into())?;
        ensure_param(self.e_min > 0.0 && self.e_max > self.e_min, || {
            "medium field range must satisfy 0 < e_min < e_max".into()
        })?;
        at_least("medium.points", self.points, 2)?;
        ensure_param(self.tones.iter().flatten().all(|v| v.is_finite()), || "medium.tones must be finite".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub beta_nu: f64,
    pub beta_nu_prime: f64,
    pub beta_nu_dblprime: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        let m = sample_medium();
        Self {
            beta_nu: m.beta_nu,
            beta_nu_prime: m.beta_nu_prime,
            beta_nu_dblprime: m.beta_nu_dblprime,
            k_min: 1e6,
            k_max: 1.09e7,
            points: 100,
        }
    }
}

impl DispersionConfig {
    pub fn validate(&self) -> Result<()> {
        finite("dispersion", &[self.beta_nu, self.beta_nu_prime, self.beta_nu_dblprime])?;
        ensure_param(self.k_min > 0.0 && self.k_max > self.k_min, || {
            "dispersion k range must satisfy 0 < k_min < k_max".into()
        })?;
        at_least("dispersion.points", self.points, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DownconvConfig {
    pub k0: f64,
    pub dz_min: f64,
    pub dz_max: f64,
    pub points: usize,
    pub fit_z_min: f64,
    pub fit_z_max: f64,
    pub fit_samples: usize,
    /// Add the coarse grid integration of the kernel
    pub oracle: bool,
    pub oracle_sigma: f64,
    pub oracle_n_perp: usize,
    pub oracle_n_z: usize,
}

impl Default for DownconvConfig {
    fn default() -> Self {
        Self {
            k0: 2.0,
            dz_min: -10.0,
            dz_max: 10.0,
            points: 201,
            fit_z_min: 50.0,
            fit_z_max: 5000.0,
            fit_samples: 200_000,
            oracle: false,
            oracle_sigma: 0.01,
            oracle_n_perp: 200,
            oracle_n_z: 200,
        }
    }
}

impl DownconvConfig {
    pub fn validate(&self) -> Result<()> {
        positive("downconv.k0", self.k0)?;
        ensure_param(self.dz_max > self.dz_min, || "downconv.dz_max must exceed dz_min".into())?;
        ensure_param(self.fit_z_min > 0.0 && self.fit_z_max > self.fit_z_min, || {
            "downconv fit range must satisfy 0 < fit_z_min < fit_z_max".into()
        })?;
        at_least("downconv.points", self.points, 2)?;
        at_least("downconv.fit_samples", self.fit_samples, 100)?;
        positive("downconv.oracle_sigma", self.oracle_sigma)?;
        at_least("downconv.oracle_n_perp", self.oracle_n_perp, 2)?;
        at_least("downconv.oracle_n_z", self.oracle_n_z, 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub extent: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolitonConfig {
    pub n0: Option<u32>,
    /// Coherent amplitude; `n0 = round(alpha²)`
    pub alpha: Option<f64>,
    pub omega1_dblprime: f64,
    pub g3: f64,
    pub grid: Option<GridConfig>,
    /// Defaults to one soliton period
    pub t_final: Option<f64>,
    pub steps: usize,
    pub snapshots: usize,
    pub mean_field: bool,
    /// Mean-field samples spread over three diffusion times
    pub mean_field_samples: usize,
}

impl Default for SolitonConfig {
    fn default() -> Self {
        Self {
            n0: None,
            alpha: None,
            omega1_dblprime: 2.0,
            g3: -0.05,
            grid: None,
            t_final: None,
            steps: 2000,
            snapshots: 5,
            mean_field: true,
            mean_field_samples: 13,
        }
    }
}

impl SolitonConfig {
    pub fn photon_number(&self) -> Result<u32> {
        match (self.n0, self.alpha) {
            (Some(_), Some(_)) => Err(Error::Parameter("give soliton.n0 or soliton.alpha, not both".into())),
            (Some(n), None) => Ok(n),
            (None, Some(a)) => {
                ensure_param(a.is_finite() && a > 0.0, || "soliton.alpha must be positive".into())?;
                Ok((a * a).round() as u32)
            }
            (None, None) => Ok(10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.photon_number()?;
        ensure_param(n >= 2, || format!("soliton photon number must be at least 2, got {n}"))?;
        positive("soliton.omega1_dblprime", self.omega1_dblprime)?;
        ensure_param(self.g3 < 0.0, || "soliton.g3 must be negative for a bound soliton".into())?;
        if let Some(t) = self.t_final {
            positive("soliton.t_final", t)?;
        }
        if let Some(g) = self.grid {
            positive("soliton.grid.extent", g.extent)?;
            at_least("soliton.grid.points", g.points, 16)?;
        }
        at_least("soliton.steps", self.steps, 1)?;
        at_least("soliton.snapshots", self.snapshots, 1)?;
        at_least("soliton.mean_field_samples", self.mean_field_samples, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub fast: bool,
    pub criteria: Vec<u8>,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { fast: false, criteria: CRITERIA.to_vec() }
    }
}

impl ValidateConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_param(self.criteria.iter().all(|c| CRITERIA.contains(c)), || {
            format!("validate.criteria must be drawn from 1..=11, got {:?}", self.criteria)
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    ensure_param(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))
}

fn finite(section: &str, vs: &[f64]) -> Result<()> {
    ensure_param(vs.iter().all(|v| v.is_finite()), || format!("{section} parameters must be finite"))
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    ensure_param(v >= min, || format!("{name} must be at least {min}, got {v}"))
}

fn dims_ok(name: &str, dims: &[usize]) -> Result<()> {
    ensure_param(dims.iter().all(|&d| d >= 2), || format!("{name} entries must be at least 2"))
}

/// SHA-256 of the command name, seed and the fully resolved section.
pub fn config_hash<T: Serialize>(command: &str, seed: Option<u64>, section: &T) -> String {
    let body = serde_json::json!({ "command": command, "seed": seed, "config": section });
    hex::encode(Sha256::digest(body.to_string().as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_unknown_keys() {
        assert!(ScenarioConfig::parse("").unwrap().is_empty());
        assert!(ScenarioConfig::parse("[squeeze]\nnp = [1e4]\nbogus = 1\n").is_err());
        assert!(ScenarioConfig::parse("[sqeeze]\n").is_err());
        let c = ScenarioConfig::parse("seed = 3\n[squeeze]\nnp = [1e4]\n").unwrap();
        let s = c.squeeze.unwrap();
        assert_eq!((s.np, s.u_points), (vec![1e4], 81));
    }

    #[test]
    fn hash_depends_on_resolved_values() {
        let a = config_hash("squeeze", None, &SqueezeConfig::default());
        let explicit = ScenarioConfig::parse("[squeeze]\nu_points = 81\n").unwrap().squeeze.unwrap();
        assert_eq!(a, config_hash("squeeze", None, &explicit));
        assert_ne!(a, config_hash("squeeze", Some(1), &explicit));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn section_preconditions() {
        assert!(SqueezeConfig { np: vec![-1.0], ..Default::default() }.validate().is_err());
        assert!(SolitonConfig { n0: Some(4), alpha: Some(2.0), ..Default::default() }.validate().is_err());
        assert_eq!(SolitonConfig { alpha: Some(3.1), ..Default::default() }.photon_number().unwrap(), 10);
        assert!(ValidateConfig { criteria: vec![12], fast: false }.validate().is_err());
        assert!(OscillatorConfig::default().validate().is_ok());
    }
}
