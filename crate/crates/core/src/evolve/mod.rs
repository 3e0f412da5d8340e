//! Unitary and Lindblad evolution, and Liouvillian steady states.

mod steady;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use crate::error::{Error, Result};
use crate::fock::{FieldOperator, QuantumState};
use crate::linalg::expm::{expmv_taylor, HermitianEigen};
use crate::linalg::ode::{self, Dp5Options};
use crate::linalg::C64;
use crate::models::ModelSpec;

pub use steady::{liouvillian_residual, steady_state, steady_state_with, SteadyOptions};

/// Below this dimension static evolution diagonalizes `H`.
pub const EIGEN_DIM_LIMIT: usize = 512;
pub const PURE_NORM_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EvolveOptions {
    /// Local error target for the adaptive integrator.
    pub rtol: f64,
    pub atol: f64,
    /// Keep every sampled state (otherwise only observables and the final state).
    pub keep_states: bool,
    pub observables: Vec<(String, FieldOperator)>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            keep_states: true,
            observables: Vec::new(),
        }
    }
}

impl EvolveOptions {
    pub fn observe(mut self, name: &str, op: FieldOperator) -> Self {
        self.observables.push((name.into(), op));
        self
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub final_state: Option<QuantumState>,
    pub observables: BTreeMap<String, Vec<C64>>,
}

impl EvolutionResult {
    fn new(times: &[f64], opts: &EvolveOptions) -> Self {
        Self {
            times: times.to_vec(),
            states: Vec::new(),
            final_state: None,
            observables: opts
                .observables
                .iter()
                .map(|(n, _)| (n.clone(), Vec::with_capacity(times.len())))
                .collect(),
        }
    }

    fn record(&mut self, state: QuantumState, opts: &EvolveOptions) -> Result<()> {
        for (name, op) in &opts.observables {
            let v = state.expectation(op)?;
            self.observables.get_mut(name).expect("declared observable").push(v);
        }
        if opts.keep_states {
            self.states.push(state.clone());
        }
        self.final_state = Some(state);
        Ok(())
    }

    /// Expectation series of `op` over the stored states.
    pub fn expectation_series(&self, op: &FieldOperator) -> Result<Vec<C64>> {
        if self.states.len() != self.times.len() {
            return Err(Error::Contract("evolution was run without keeping states".into()));
        }
        self.states.iter().map(|s| s.expectation(op)).collect()
    }

    pub fn observable(&self, name: &str) -> Option<&[C64]> {
        self.observables.get(name).map(|v| v.as_slice())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Contract("sample times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Contract("sample times must be non-decreasing".into()));
    }
    Ok(())
}

fn check_norm(v: &[C64], t: f64) -> Result<()> {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if !n.is_finite() || (n - 1.0).abs() >= PURE_NORM_TOL {
        return Err(Error::Numeric(format!("norm drifted to {n:.12} at t = {t}")));
    }
    Ok(())
}

/// `ψ(t) = U(t)ψ₀` at every sample time (measured from `t = 0`).
pub fn evolve_pure(model: &ModelSpec, psi0: &QuantumState, times: &[f64]) -> Result<EvolutionResult> {
    evolve_pure_with(model, psi0, times, &EvolveOptions::default())
}

pub fn evolve_pure_with(
    model: &ModelSpec,
    psi0: &QuantumState,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    if model.has_dissipation() {
        return Err(Error::Contract(format!("model {} has dissipators; use evolve_lindblad", model.name)));
    }
    if psi0.space() != &model.space {
        return Err(Error::Contract("initial state lives on a different space".into()));
    }
    let v0 = psi0
        .vector()
        .ok_or_else(|| Error::Contract("evolve_pure needs a pure initial state".into()))?
        .as_slice()
        .to_vec();
    check_times(times)?;
    let space = &model.space;
    let mut result = EvolutionResult::new(times, opts);

    if model.is_time_dependent() {
        let ops: Vec<(FieldOperator, FieldOperator, f64)> = model
            .rotating
            .iter()
            .map(|r| (r.op.clone(), r.op.adjoint(), r.frequency))
            .collect();
        let h0 = &model.hamiltonian;
        let n = v0.len();
        let mut scratch = vec![C64::new(0.0, 0.0); n];
        let rhs = move |t: f64, y: &[C64], dy: &mut [C64]| {
            h0.apply_into(y, dy);
            for (op, opd, w) in &ops {
                let ph = C64::from_polar(1.0, -w * t);
                op.apply_into(y, &mut scratch);
                dy.iter_mut().zip(&scratch).for_each(|(d, s)| *d += ph * s);
                opd.apply_into(y, &mut scratch);
                dy.iter_mut().zip(&scratch).for_each(|(d, s)| *d += ph.conj() * s);
            }
            dy.iter_mut().for_each(|d| *d *= C64::new(0.0, -1.0));
        };
        let mut y = v0;
        let dp = Dp5Options {
            rtol: opts.rtol,
            atol: opts.atol,
            ..Default::default()
        };
        let mut samples = Vec::with_capacity(times.len());
        ode::integrate(rhs, 0.0, &mut y, times, &dp, |_, _, y| samples.push(y.to_vec()))?;
        for (v, &t) in samples.into_iter().zip(times) {
            check_norm(&v, t)?;
            result.record(QuantumState::pure_unchecked(space, v), opts)?;
        }
        return Ok(result);
    }

    let h = &model.hamiltonian;
    if h.dim() < EIGEN_DIM_LIMIT {
        let eig = HermitianEigen::new(&h.to_dense())?;
        for &t in times {
            let v = eig.propagate(t, &v0);
            check_norm(&v, t)?;
            result.record(QuantumState::pure_unchecked(space, v), opts)?;
        }
    } else {
        let norm = h.norm_bound();
        let mut v = v0;
        let mut t_prev = 0.0;
        for &t in times {
            if t > t_prev {
                v = expmv_taylor(|x, out| h.apply_into(x, out), norm, t - t_prev, &v)?;
                t_prev = t;
            }
            check_norm(&v, t)?;
            result.record(QuantumState::pure_unchecked(space, v.clone()), opts)?;
        }
    }
    Ok(result)
}

/// Right-hand side of the master equation acting on column-major density
/// matrices:
/// `dρ/dt = -i[H(t), ρ] + Σ γ(2LρL† - L†Lρ - ρL†L)`.
pub(crate) struct Liouvillian {
    dim: usize,
    /// `-iH₀ - Σ γ L†L` and its adjoint
    k: FieldOperator,
    k_adj: FieldOperator,
    /// `(L, L†, 2γ)`
    jumps: Vec<(FieldOperator, FieldOperator, f64)>,
    /// `(P, P†, ω)` for `V(t) = P e^{-iωt} + h.c.`
    rotating: Vec<(FieldOperator, FieldOperator, f64)>,
}

impl Liouvillian {
    pub(crate) fn new(model: &ModelSpec) -> Result<Self> {
        let mut k = model.hamiltonian.scale(C64::new(0.0, -1.0));
        let mut jumps = Vec::new();
        for d in &model.dissipators {
            if d.rate > 0.0 {
                let ld = d.op.adjoint();
                k = k.axpy(C64::new(-d.rate, 0.0), &ld.mul(&d.op)?)?;
                jumps.push((d.op.clone(), ld, 2.0 * d.rate));
            }
        }
        Ok(Self {
            dim: model.space.total_dim(),
            k_adj: k.adjoint(),
            k,
            jumps,
            rotating: model
                .rotating
                .iter()
                .map(|r| (r.op.clone(), r.op.adjoint(), r.frequency))
                .collect(),
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// Valid for any matrix, hermitian or not, so the same map serves as the
    /// superoperator in the steady-state solvers.
    pub(crate) fn apply(&self, t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = self.k.left_mul(rho) + self.k_adj.right_mul(rho);
        for (l, ld, w) in &self.jumps {
            out += ld.right_mul(&l.left_mul(rho)) * C64::new(*w, 0.0);
        }
        for (p, pd, w) in &self.rotating {
            let ph = C64::from_polar(1.0, -w * t);
            let v_rho = p.left_mul(rho) * ph + pd.left_mul(rho) * ph.conj();
            let rho_v = p.right_mul(rho) * ph + pd.right_mul(rho) * ph.conj();
            out += (v_rho - rho_v) * C64::new(0.0, -1.0);
        }
        out
    }

    /// Diagonal of `-iH₀ - Σ γ L†L` in the Fock basis.
    pub(crate) fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.k.get(i, i)).collect()
    }

    pub(crate) fn apply_slice(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        let rho = DMatrix::from_column_slice(self.dim, self.dim, y);
        dy.copy_from_slice(self.apply(t, &rho).as_slice());
    }
}

fn trace_of(y: &[C64], dim: usize) -> C64 {
    (0..dim).map(|i| y[i * dim + i]).sum()
}

/// Integrates the master equation; pure inputs are promoted to densities.
/// Trace drift beyond `TRACE_TOL` is reported as a numeric error.
pub fn evolve_lindblad(model: &ModelSpec, rho0: &QuantumState, times: &[f64]) -> Result<EvolutionResult> {
    evolve_lindblad_with(model, rho0, times, &EvolveOptions::default())
}

pub fn evolve_lindblad_with(
    model: &ModelSpec,
    rho0: &QuantumState,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    if rho0.space() != &model.space {
        return Err(Error::Contract("initial state lives on a different space".into()));
    }
    check_times(times)?;
    let liou = Liouvillian::new(model)?;
    let dim = liou.dim();
    let mut y = rho0.density_matrix().as_slice().to_vec();
    let dp = Dp5Options {
        rtol: opts.rtol,
        atol: opts.atol,
        ..Default::default()
    };
    let mut samples = Vec::with_capacity(times.len());
    let stats = ode::integrate(
        |t, y, dy| liou.apply_slice(t, y, dy),
        0.0,
        &mut y,
        times,
        &dp,
        |_, _, y| samples.push(y.to_vec()),
    )?;
    let mut result = EvolutionResult::new(times, opts);
    for (v, &t) in samples.into_iter().zip(times) {
        let tr = trace_of(&v, dim);
        if !tr.re.is_finite() || (tr - 1.0).norm() >= TRACE_TOL {
            return Err(Error::Numeric(format!(
                "trace drifted to {:.12} at t = {t} after {} steps ({} rejected)",
                tr.re, stats.accepted, stats.rejected
            )));
        }
        let m = DMatrix::from_column_slice(dim, dim, &v);
        result.record(QuantumState::density_unchecked(&model.space, m), opts)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, coherent_state, fock_state, make_space, number_operator};
    use crate::models::{dpo_model, h_kerr_single, h_parametric_lab, ModelSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn free_rotation_of_coherent_state() {
        let s = make_space(&[30]).unwrap();
        let m = h_kerr_single(&s, 1.7, 0.0).unwrap();
        let alpha = c(1.2, -0.4);
        let psi = coherent_state(&s, &[alpha]).unwrap();
        let times = [0.0, 0.5, 2.0];
        let r = evolve_pure(&m, &psi, &times).unwrap();
        for (st, &t) in r.states.iter().zip(&times) {
            let expected = coherent_state(&s, &[alpha * C64::from_polar(1.0, -1.7 * t)]).unwrap();
            assert!(st.max_abs_diff(&expected).unwrap() < 1e-9);
        }
    }

    #[test]
    fn taylor_path_matches_eigen_path() {
        let s = make_space(&[600]).unwrap();
        let m = h_kerr_single(&s, 0.3, 0.01).unwrap();
        let psi = coherent_state(&make_space(&[600]).unwrap(), &[c(2.0, 0.0)]).unwrap();
        let r = evolve_pure(&m, &psi, &[0.7]).unwrap();
        let s_small = make_space(&[60]).unwrap();
        let m_small = h_kerr_single(&s_small, 0.3, 0.01).unwrap();
        let psi_small = coherent_state(&s_small, &[c(2.0, 0.0)]).unwrap();
        let r_small = evolve_pure(&m_small, &psi_small, &[0.7]).unwrap();
        let big = r.states[0].vector().unwrap();
        let small = r_small.states[0].vector().unwrap();
        for i in 0..60 {
            assert!((big[i] - small[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn lab_frame_pump_matches_rotating_frame() {
        // With ω the only free frequency, the lab-frame solution is the
        // rotating-frame one rotated back by e^{-iωt n}.
        let s = make_space(&[20]).unwrap();
        let omega = 2.0;
        let kappa = 0.1;
        let lab = h_parametric_lab(&s, omega, kappa, c(1.0, 0.0)).unwrap();
        let psi = fock_state(&s, &[0]).unwrap();
        let t = 1.3;
        let r = evolve_pure(&lab, &psi, &[t]).unwrap();
        let mut rot = ModelSpec::clone(&lab);
        rot.rotating.clear();
        let a2d = annihilation(&s, 0).unwrap().adjoint().pow(2).unwrap().scale(c(kappa, 0.0));
        rot.hamiltonian = a2d.add(&a2d.adjoint()).unwrap().with_hermitian_tag(true).unwrap();
        let r_rot = evolve_pure(&rot, &psi, &[t]).unwrap();
        let back = r_rot.states[0]
            .transform(&crate::fock::rotation(&s, 0, -omega * t).unwrap())
            .unwrap();
        assert!(r.states[0].max_abs_diff(&back).unwrap() < 1e-8);
    }

    #[test]
    fn damping_decays_number_at_twice_the_rate() {
        let s = make_space(&[6, 2]).unwrap();
        let m = dpo_model(&s, 0.0, 0.0, 0.4, 0.0).unwrap();
        let rho = fock_state(&s, &[4, 0]).unwrap();
        let times: Vec<f64> = (0..6).map(|k| 0.5 * k as f64).collect();
        let opts = EvolveOptions::default().observe("n", number_operator(&s, 0).unwrap());
        let r = evolve_lindblad_with(&m, &rho, &times, &opts).unwrap();
        for (v, t) in r.observable("n").unwrap().iter().zip(&times) {
            assert!((v.re - 4.0 * (-0.8 * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn lindblad_without_damping_matches_unitary() {
        let s = make_space(&[12]).unwrap();
        let m = h_kerr_single(&s, 0.5, 0.3).unwrap();
        let psi = coherent_state(&s, &[c(0.8, 0.3)]).unwrap();
        let times = [0.4, 1.1];
        let u = evolve_pure(&m, &psi, &times).unwrap();
        let l = evolve_lindblad(&m, &psi.to_density(), &times).unwrap();
        for (a, b) in u.states.iter().zip(&l.states) {
            assert!(a.to_density().max_abs_diff(b).unwrap() < 1e-9);
        }
    }

    #[test]
    fn rejects_dissipative_model_in_pure_evolution() {
        let s = make_space(&[3, 3]).unwrap();
        let m = dpo_model(&s, 0.1, 0.1, 1.0, 1.0).unwrap();
        let psi = fock_state(&s, &[0, 0]).unwrap();
        assert!(matches!(evolve_pure(&m, &psi, &[1.0]), Err(Error::Contract(_))));
    }
}
