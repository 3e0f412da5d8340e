use nalgebra::{DMatrix, DVector};

use super::operator::{FieldOperator, Storage, HERMITIAN_TOL};
use super::space::SpaceDescriptor;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Default bound on the Poisson mass a coherent state may lose to truncation.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

const NORM_TOL: f64 = 1e-10;
const EIG_TOL: f64 = 1e-10;
/// Above this dimension the spectrum check on density matrices is skipped.
const SPECTRUM_CHECK_MAX_DIM: usize = 1024;

#[derive(Clone, Debug)]
pub enum StateData {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// A pure vector or density matrix on a [`SpaceDescriptor`], with the
/// truncation tail mass recorded per mode at construction.
#[derive(Clone, Debug)]
pub struct QuantumState {
    space: SpaceDescriptor,
    data: StateData,
    tail: Vec<f64>,
}

fn check_hermitian_density(m: &DMatrix<C64>, check_spectrum: bool) -> Result<()> {
    let tr = m.trace();
    if (tr.re - 1.0).abs() >= NORM_TOL || tr.im.abs() >= NORM_TOL {
        return Err(Error::Contract(format!("density matrix trace is {tr}")));
    }
    let defect = (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if defect >= HERMITIAN_TOL {
        return Err(Error::Contract(format!("density matrix hermiticity defect {defect:.3e}")));
    }
    if check_spectrum && m.nrows() <= SPECTRUM_CHECK_MAX_DIM {
        let min = m.clone().symmetric_eigen().eigenvalues.min();
        if min <= -EIG_TOL {
            return Err(Error::Contract(format!("density matrix has eigenvalue {min:.3e}")));
        }
    }
    Ok(())
}

impl QuantumState {
    /// A pure state; the vector must already be normalized.
    pub fn pure(space: &SpaceDescriptor, v: Vec<C64>) -> Result<Self> {
        if v.len() != space.total_dim() {
            return Err(Error::Contract(format!(
                "vector of length {} for a space of dimension {}",
                v.len(),
                space.total_dim()
            )));
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() >= NORM_TOL {
            return Err(Error::Contract(format!("state norm is {norm}")));
        }
        Ok(Self {
            space: space.clone(),
            data: StateData::Pure(DVector::from_vec(v)),
            tail: vec![0.0; space.n_modes()],
        })
    }

    /// A pure state from an arbitrary nonzero vector, rescaled to unit norm.
    pub fn pure_normalized(space: &SpaceDescriptor, mut v: Vec<C64>) -> Result<Self> {
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Contract("cannot normalize a zero or non-finite vector".into()));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Self::pure(space, v)
    }

    /// A density matrix, checked for unit trace, hermiticity and positivity.
    pub fn density(space: &SpaceDescriptor, m: DMatrix<C64>) -> Result<Self> {
        let n = space.total_dim();
        if m.shape() != (n, n) {
            return Err(Error::Contract(format!(
                "density matrix is {:?} for a space of dimension {n}",
                m.shape()
            )));
        }
        check_hermitian_density(&m, true)?;
        Ok(Self::density_unchecked(space, m))
    }

    pub(crate) fn density_unchecked(space: &SpaceDescriptor, m: DMatrix<C64>) -> Self {
        Self {
            space: space.clone(),
            data: StateData::Density(m),
            tail: vec![0.0; space.n_modes()],
        }
    }

    pub(crate) fn pure_unchecked(space: &SpaceDescriptor, v: Vec<C64>) -> Self {
        Self {
            space: space.clone(),
            data: StateData::Pure(DVector::from_vec(v)),
            tail: vec![0.0; space.n_modes()],
        }
    }

    pub(crate) fn with_tail(mut self, tail: Vec<f64>) -> Self {
        self.tail = tail;
        self
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    /// Probability mass each mode lost to truncation when the state was built.
    pub fn tail_mass(&self) -> &[f64] {
        &self.tail
    }

    pub fn vector(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn to_density(&self) -> Self {
        Self {
            space: self.space.clone(),
            data: StateData::Density(self.density_matrix()),
            tail: self.tail.clone(),
        }
    }

    /// `‖ψ‖` for pure states, `Re Tr ρ` for densities.
    pub fn norm(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm(),
            StateData::Density(m) => m.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Density(m) => m.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.data {
            StateData::Pure(_) => 0.0,
            StateData::Density(m) => m.clone().symmetric_eigen().eigenvalues.min(),
        }
    }

    fn check_space(&self, op: &FieldOperator) -> Result<()> {
        if op.space() == &self.space {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "operator on {:?} applied to a state on {:?}",
                op.space().dims(),
                self.space.dims()
            )))
        }
    }

    /// `⟨ψ|O|ψ⟩` or `Tr(ρO)`.
    pub fn expectation(&self, op: &FieldOperator) -> Result<C64> {
        self.check_space(op)?;
        Ok(match &self.data {
            StateData::Pure(v) => {
                let ov = op.apply(v.as_slice());
                v.iter().zip(&ov).map(|(a, b)| a.conj() * b).sum()
            }
            StateData::Density(m) => trace_product(m, op),
        })
    }

    /// `⟨O²⟩ - ⟨O⟩²` for hermitian `O`.
    pub fn variance(&self, op: &FieldOperator) -> Result<f64> {
        self.check_space(op)?;
        let defect = op.hermiticity_defect();
        if defect >= HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "variance needs a hermitian operator (defect {defect:.3e})"
            )));
        }
        let mean = self.expectation(op)?.re;
        let second = match &self.data {
            StateData::Pure(v) => op.apply(v.as_slice()).iter().map(|x| x.norm_sqr()).sum::<f64>(),
            StateData::Density(m) => {
                let y = op.left_mul(m);
                trace_product(&y, op).re
            }
        };
        Ok(second - mean * mean)
    }

    /// Photon-number distribution of one mode.
    pub fn number_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        self.space.check_mode(mode)?;
        let mut p = vec![0.0; self.space.dim(mode)];
        match &self.data {
            StateData::Pure(v) => {
                for (i, x) in v.iter().enumerate() {
                    p[self.space.occupation_of(i, mode)] += x.norm_sqr();
                }
            }
            StateData::Density(m) => {
                for i in 0..m.nrows() {
                    p[self.space.occupation_of(i, mode)] += m[(i, i)].re;
                }
            }
        }
        Ok(p)
    }

    /// Reduced density matrix on `keep` (ascending mode order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Contract("partial trace needs at least one kept mode".into()));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        for &m in &keep {
            self.space.check_mode(m)?;
        }
        if keep.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Contract("kept modes must be distinct".into()));
        }
        let env: Vec<usize> = (0..self.space.n_modes()).filter(|m| !keep.contains(m)).collect();
        let sub = self.space.subspace(&keep)?;
        let dk = sub.total_dim();
        let de: usize = env.iter().map(|&m| self.space.dim(m)).product();
        let n = self.space.total_dim();
        let mut kidx = vec![0usize; n];
        let mut eidx = vec![0usize; n];
        for i in 0..n {
            let occ = self.space.occupation(i);
            kidx[i] = keep.iter().fold(0, |acc, &m| acc * self.space.dim(m) + occ[m]);
            eidx[i] = env.iter().fold(0, |acc, &m| acc * self.space.dim(m) + occ[m]);
        }
        let tail = keep.iter().map(|&m| self.tail[m]).collect();
        let reduced = match &self.data {
            StateData::Pure(v) => {
                let mut psi = DMatrix::<C64>::zeros(dk, de);
                for i in 0..n {
                    psi[(kidx[i], eidx[i])] = v[i];
                }
                &psi * psi.adjoint()
            }
            StateData::Density(m) => {
                let mut table = vec![0usize; n];
                for i in 0..n {
                    table[kidx[i] * de + eidx[i]] = i;
                }
                DMatrix::from_fn(dk, dk, |a, b| {
                    (0..de).map(|e| m[(table[a * de + e], table[b * de + e])]).sum()
                })
            }
        };
        Ok(Self::density_unchecked(&sub, reduced).with_tail(tail))
    }

    /// `UψU†` (or `U|ψ⟩`).
    pub fn transform(&self, u: &FieldOperator) -> Result<Self> {
        self.check_space(u)?;
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(DVector::from_vec(u.apply(v.as_slice()))),
            StateData::Density(m) => StateData::Density(u.adjoint().right_mul(&u.left_mul(m))),
        };
        Ok(Self {
            space: self.space.clone(),
            data,
            tail: self.tail.clone(),
        })
    }

    /// Tensor product, with `other`'s modes appended after `self`'s.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dims: Vec<usize> = self.space.dims().iter().chain(other.space.dims()).copied().collect();
        let space = SpaceDescriptor::new(&dims)?;
        let tail: Vec<f64> = self.tail.iter().chain(&other.tail).copied().collect();
        let data = match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => StateData::Pure(a.kronecker(b)),
            _ => StateData::Density(self.density_matrix().kronecker(&other.density_matrix())),
        };
        Ok(Self { space, data, tail })
    }

    /// `max|ρ - σ|` over density-matrix entries.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::Contract("states live on different spaces".into()));
        }
        Ok((self.density_matrix() - other.density_matrix())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max))
    }
}

/// `Tr(M O)` without forming the product.
pub(crate) fn trace_product(m: &DMatrix<C64>, op: &FieldOperator) -> C64 {
    match op.storage() {
        Storage::Sparse(o) => o.iter().map(|(j, i, v)| v * m[(i, j)]).sum(),
        Storage::Dense(o) => m.iter().zip(o.transpose().iter()).map(|(a, b)| a * b).sum(),
    }
}

/// Unnormalized truncated coherent amplitudes `e^{-|α|²/2} αⁿ/√n!` for `n < dim`.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Vec<C64> {
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[0] = C64::new(1.0, 0.0);
        return v;
    }
    let ln_r = alpha.norm().ln();
    let theta = alpha.arg();
    let mut ln_fact_half = 0.0;
    (0..dim)
        .map(|n| {
            if n > 0 {
                ln_fact_half += 0.5 * (n as f64).ln();
            }
            let lnmag = -0.5 * r2 + n as f64 * ln_r - ln_fact_half;
            C64::from_polar(lnmag.exp(), theta * n as f64)
        })
        .collect()
}

/// Poisson mass at or above `dim` for mean `mean`.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    if (dim as f64) <= mean + 1.0 {
        let head: f64 = coherent_amplitudes(C64::new(mean.sqrt(), 0.0), dim)
            .iter()
            .map(|x| x.norm_sqr())
            .sum();
        return (1.0 - head).max(0.0);
    }
    let ln_mean = mean.ln();
    let ln_fact: f64 = (1..=dim).map(|k| (k as f64).ln()).sum();
    let mut ln_p = -mean + dim as f64 * ln_mean - ln_fact;
    let mut sum = 0.0;
    let mut n = dim;
    loop {
        let p = ln_p.exp();
        sum += p;
        if p <= sum * 1e-17 || p == 0.0 {
            break;
        }
        n += 1;
        ln_p += ln_mean - (n as f64).ln();
    }
    sum
}

pub fn coherent_state(space: &SpaceDescriptor, amplitudes: &[C64]) -> Result<QuantumState> {
    coherent_state_with_tolerance(space, amplitudes, DEFAULT_TAIL_TOLERANCE)
}

/// Product of truncated coherent states, normalized; fails if any mode's
/// Poisson tail beyond its truncation exceeds `tolerance`.
pub fn coherent_state_with_tolerance(
    space: &SpaceDescriptor,
    amplitudes: &[C64],
    tolerance: f64,
) -> Result<QuantumState> {
    if amplitudes.len() != space.n_modes() {
        return Err(Error::Contract(format!(
            "{} amplitudes for a {}-mode space",
            amplitudes.len(),
            space.n_modes()
        )));
    }
    let mut tails = Vec::with_capacity(amplitudes.len());
    let mut factors = Vec::with_capacity(amplitudes.len());
    for (mode, (&alpha, &d)) in amplitudes.iter().zip(space.dims()).enumerate() {
        let tail = poisson_tail(alpha.norm_sqr(), d);
        if tail > tolerance {
            return Err(Error::Truncation { mode, tail, tolerance });
        }
        tails.push(tail);
        let mut f = coherent_amplitudes(alpha, d);
        let norm = f.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        f.iter_mut().for_each(|x| *x /= norm);
        factors.push(DVector::from_vec(f));
    }
    let mut v = factors[0].clone();
    for f in &factors[1..] {
        v = v.kronecker(f);
    }
    Ok(QuantumState::pure_unchecked(space, v.as_slice().to_vec()).with_tail(tails))
}

pub fn fock_state(space: &SpaceDescriptor, occupation: &[usize]) -> Result<QuantumState> {
    let idx = space.flat_index(occupation)?;
    let mut v = vec![C64::new(0.0, 0.0); space.total_dim()];
    v[idx] = C64::new(1.0, 0.0);
    Ok(QuantumState::pure_unchecked(space, v))
}
