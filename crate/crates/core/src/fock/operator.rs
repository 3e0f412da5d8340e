use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use super::space::SpaceDescriptor;
use crate::error::{Error, Result};
use crate::linalg::sparse::CsrMatrix;
use crate::linalg::C64;

/// Tolerance on `max|M - M†|` for operators tagged hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

static SPARSE_THRESHOLD: AtomicUsize = AtomicUsize::new(256);

/// Spaces with total dimension above this store operators in CSR form.
pub fn sparse_threshold() -> usize {
    SPARSE_THRESHOLD.load(Ordering::Relaxed)
}

pub fn set_sparse_threshold(dim: usize) {
    SPARSE_THRESHOLD.store(dim, Ordering::Relaxed);
}

#[derive(Clone, Debug)]
pub enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// A square complex matrix acting on the full space of a [`SpaceDescriptor`].
#[derive(Clone, Debug)]
pub struct FieldOperator {
    space: SpaceDescriptor,
    storage: Storage,
    hermitian: bool,
}

fn same_space(a: &SpaceDescriptor, b: &SpaceDescriptor) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "operators act on different spaces {:?} and {:?}",
            a.dims(),
            b.dims()
        )))
    }
}

impl FieldOperator {
    fn build(space: &SpaceDescriptor, m: CsrMatrix, hermitian: bool) -> Result<Self> {
        let n = space.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Contract(format!(
                "matrix is {}x{} but the space has dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let storage = if n > sparse_threshold() {
            Storage::Sparse(m)
        } else {
            Storage::Dense(m.to_dense())
        };
        let op = Self {
            space: space.clone(),
            storage,
            hermitian,
        };
        op.check_tag()?;
        Ok(op)
    }

    fn check_tag(&self) -> Result<()> {
        if self.hermitian {
            let d = self.hermiticity_defect();
            if d >= HERMITIAN_TOL {
                return Err(Error::Contract(format!(
                    "operator tagged hermitian has defect {d:.3e}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_csr(space: &SpaceDescriptor, m: CsrMatrix, hermitian: bool) -> Result<Self> {
        Self::build(space, m, hermitian)
    }

    pub fn from_triplets<I>(space: &SpaceDescriptor, triplets: I, hermitian: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let n = space.total_dim();
        Self::build(space, CsrMatrix::from_triplets(n, n, triplets), hermitian)
    }

    pub fn from_dense(space: &SpaceDescriptor, m: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        let n = space.total_dim();
        if m.shape() != (n, n) {
            return Err(Error::Contract(format!(
                "matrix is {:?} but the space has dimension {n}",
                m.shape()
            )));
        }
        let op = Self {
            space: space.clone(),
            storage: Storage::Dense(m),
            hermitian,
        };
        op.check_tag()?;
        Ok(op)
    }

    pub fn identity(space: &SpaceDescriptor) -> Self {
        let n = space.total_dim();
        Self::build(space, CsrMatrix::identity(n), true).expect("identity is valid")
    }

    pub fn zeros(space: &SpaceDescriptor) -> Self {
        let n = space.total_dim();
        Self::build(space, CsrMatrix::zeros(n, n), true).expect("zero is valid")
    }

    /// Diagonal operator `f(n)` of one mode's occupation.
    pub fn number_function<F>(space: &SpaceDescriptor, mode: usize, f: F) -> Result<Self>
    where
        F: Fn(usize) -> C64,
    {
        space.check_mode(mode)?;
        let values: Vec<C64> = (0..space.dim(mode)).map(&f).collect();
        let hermitian = values.iter().all(|v| v.im == 0.0);
        Self::from_triplets(
            space,
            (0..space.total_dim()).map(|i| (i, i, values[space.occupation_of(i, mode)])),
            hermitian,
        )
    }

    /// Lifts a single-mode matrix onto `mode` of `space`.
    pub fn embed(space: &SpaceDescriptor, mode: usize, single: &CsrMatrix, hermitian: bool) -> Result<Self> {
        space.check_mode(mode)?;
        let d = space.dim(mode);
        if single.nrows() != d || single.ncols() != d {
            return Err(Error::Contract(format!(
                "single-mode matrix is {}x{} for a mode of dimension {d}",
                single.nrows(),
                single.ncols()
            )));
        }
        let stride = space.stride(mode);
        let outer = space.total_dim() / (d * stride);
        let mut trip = Vec::with_capacity(single.nnz() * outer * stride);
        for (r, c, v) in single.iter() {
            for hi in 0..outer {
                let base = hi * d * stride;
                for lo in 0..stride {
                    trip.push((base + r * stride + lo, base + c * stride + lo, v));
                }
            }
        }
        Self::from_triplets(space, trip, hermitian)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Whether the operator was constructed (and checked) as hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Re-tags the operator, verifying the defect when tagging as hermitian.
    pub fn with_hermitian_tag(mut self, hermitian: bool) -> Result<Self> {
        self.hermitian = hermitian;
        self.check_tag()?;
        Ok(self)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(m) => m.clone(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(m) => m.get(i, j),
        }
    }

    /// Matrix element `⟨bra|O|ket⟩` between occupation-number basis states.
    pub fn element(&self, bra: &[usize], ket: &[usize]) -> Result<C64> {
        Ok(self.get(self.space.flat_index(bra)?, self.space.flat_index(ket)?))
    }

    pub fn adjoint(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(m) => Storage::Sparse(m.adjoint()),
        };
        Self {
            space: self.space.clone(),
            storage,
            hermitian: self.hermitian,
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => m.axpy(C64::new(-1.0, 0.0), &m.adjoint()).max_abs(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Sparse(m) => m.max_abs(),
        }
    }

    /// Upper bound on the induced 2-norm (geometric mean of the 1- and ∞-norms).
    pub fn norm_bound(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => {
                let row = m
                    .row_iter()
                    .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
                    .fold(0.0, f64::max);
                let col = m
                    .column_iter()
                    .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
                    .fold(0.0, f64::max);
                (row * col).sqrt()
            }
            Storage::Sparse(m) => (m.norm_inf() * m.adjoint().norm_inf()).sqrt(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        match &self.storage {
            Storage::Dense(m) => m
                .iter()
                .enumerate()
                .all(|(k, v)| k % m.nrows() == k / m.nrows() || (v.re == 0.0 && v.im == 0.0)),
            Storage::Sparse(m) => m.is_diagonal(),
        }
    }

    fn combine(&self, c: C64, other: &Self, hermitian: bool) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.axpy(c, b)),
            _ => Storage::Dense(self.to_dense() + other.to_dense() * c),
        };
        Ok(Self {
            space: self.space.clone(),
            storage,
            hermitian,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(C64::new(1.0, 0.0), other, self.hermitian && other.hermitian)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(C64::new(-1.0, 0.0), other, self.hermitian && other.hermitian)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
        let h = self.hermitian && other.hermitian && c.im == 0.0;
        self.combine(c, other, h)
    }

    pub fn scale(&self, c: C64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * c),
            Storage::Sparse(m) => Storage::Sparse(m.scale(c)),
        };
        Self {
            space: self.space.clone(),
            storage,
            hermitian: self.hermitian && c.im == 0.0,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_space(&self.space, &other.space)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.mul(b)),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(a.mul_dense(b)),
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * b),
            (Storage::Dense(a), Storage::Sparse(b)) => Storage::Dense(b.adjoint().dense_mul_adjoint(a)),
        };
        Ok(Self {
            space: self.space.clone(),
            storage,
            hermitian: false,
        })
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::identity(&self.space);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        out.hermitian = self.hermitian;
        Ok(out)
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        match &self.storage {
            Storage::Sparse(m) => m.mul_vec_into(x, out),
            Storage::Dense(m) => {
                out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
                for (j, &xj) in x.iter().enumerate() {
                    if xj.re == 0.0 && xj.im == 0.0 {
                        continue;
                    }
                    for (o, &mij) in out.iter_mut().zip(m.column(j).iter()) {
                        *o += mij * xj;
                    }
                }
            }
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    /// `O · X`
    pub fn left_mul(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.storage {
            Storage::Sparse(m) => m.mul_dense(x),
            Storage::Dense(m) => m * x,
        }
    }

    /// `X · O`
    pub fn right_mul(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.storage {
            Storage::Sparse(m) => m.adjoint().dense_mul_adjoint(x),
            Storage::Dense(m) => x * m,
        }
    }

    /// Largest entry of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }
}

fn lowering(d: usize) -> CsrMatrix {
    CsrMatrix::from_triplets(d, d, (1..d).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))))
}

/// `a` on `mode`: `a|n⟩ = √n |n-1⟩`.
pub fn annihilation(space: &SpaceDescriptor, mode: usize) -> Result<FieldOperator> {
    space.check_mode(mode)?;
    FieldOperator::embed(space, mode, &lowering(space.dim(mode)), false)
}

pub fn creation(space: &SpaceDescriptor, mode: usize) -> Result<FieldOperator> {
    space.check_mode(mode)?;
    FieldOperator::embed(space, mode, &lowering(space.dim(mode)).adjoint(), false)
}

pub fn number_operator(space: &SpaceDescriptor, mode: usize) -> Result<FieldOperator> {
    FieldOperator::number_function(space, mode, |n| C64::new(n as f64, 0.0))
}

/// `X(φ) = (e^{iφ} a† + e^{-iφ} a) / 2`, vacuum variance 1/4.
pub fn quadrature(space: &SpaceDescriptor, mode: usize, phi: f64) -> Result<FieldOperator> {
    space.check_mode(mode)?;
    let d = space.dim(mode);
    let e = C64::from_polar(0.5, phi);
    let single = CsrMatrix::from_triplets(
        d,
        d,
        (1..d).flat_map(|n| {
            let s = (n as f64).sqrt();
            [(n - 1, n, e.conj() * s), (n, n - 1, e * s)]
        }),
    );
    FieldOperator::embed(space, mode, &single, true)
}

/// Canonical position `x = (a† + a)/√2`, vacuum variance 1/2.
pub fn position(space: &SpaceDescriptor, mode: usize) -> Result<FieldOperator> {
    Ok(quadrature(space, mode, 0.0)?.scale(C64::new(std::f64::consts::SQRT_2, 0.0)))
}

/// Canonical momentum `p = i(a† - a)/√2`, vacuum variance 1/2.
pub fn momentum(space: &SpaceDescriptor, mode: usize) -> Result<FieldOperator> {
    Ok(quadrature(space, mode, std::f64::consts::FRAC_PI_2)?.scale(C64::new(std::f64::consts::SQRT_2, 0.0)))
}

/// Phase rotation `e^{iθ n̂}` on `mode`.
pub fn rotation(space: &SpaceDescriptor, mode: usize, theta: f64) -> Result<FieldOperator> {
    FieldOperator::number_function(space, mode, |n| C64::from_polar(1.0, theta * n as f64))
}

/// Parity `e^{iπ n̂}`.
pub fn parity(space: &SpaceDescriptor, mode: usize) -> Result<FieldOperator> {
    FieldOperator::number_function(space, mode, |n| C64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::space::make_space;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ladder_action() {
        let s = make_space(&[3]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        assert_eq!(a.element(&[0], &[1]).unwrap(), c(1.0, 0.0));
        assert!((a.element(&[1], &[2]).unwrap() - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let ad = creation(&s, 0).unwrap();
        assert!(ad.max_abs_diff(&a.adjoint()).unwrap() == 0.0);
        assert!(matches!(annihilation(&s, 1), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn number_is_diagonal() {
        let s = make_space(&[4]).unwrap();
        let n = number_operator(&s, 0).unwrap();
        assert!(n.is_diagonal() && n.is_hermitian());
        for k in 0..4 {
            assert_eq!(n.get(k, k), c(k as f64, 0.0));
        }
    }

    #[test]
    fn commutator_is_identity_except_top() {
        let s = make_space(&[3, 5]).unwrap();
        for mode in 0..2 {
            let a = annihilation(&s, mode).unwrap();
            let comm = a.commutator(&a.adjoint()).unwrap();
            let d = s.dim(mode);
            for i in 0..s.total_dim() {
                for j in 0..s.total_dim() {
                    let v = comm.get(i, j);
                    let expect = if i != j {
                        0.0
                    } else if s.occupation_of(i, mode) == d - 1 {
                        1.0 - d as f64
                    } else {
                        1.0
                    };
                    assert!((v - c(expect, 0.0)).norm() < 1e-13, "mode {mode} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn quadratures_reassemble_lowering() {
        let s = make_space(&[6]).unwrap();
        let x0 = quadrature(&s, 0, 0.0).unwrap();
        let x1 = quadrature(&s, 0, std::f64::consts::FRAC_PI_2).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let rebuilt = x0.axpy(c(0.0, 1.0), &x1).unwrap();
        assert!(rebuilt.max_abs_diff(&a).unwrap() < 1e-15);
        let xpi = quadrature(&s, 0, std::f64::consts::PI).unwrap();
        assert!(xpi.add(&x0).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn sparse_and_dense_agree() {
        let s = make_space(&[20, 20]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        assert!(a.is_sparse());
        let prod = a.adjoint().mul(&b).unwrap().to_dense();
        let dense = a.adjoint().to_dense() * b.to_dense();
        assert!((prod - dense).norm() < 1e-12);
        let x = DMatrix::from_fn(400, 3, |i, j| c(i as f64 * 0.01, j as f64));
        assert!((a.right_mul(&x.transpose()) - x.transpose() * a.to_dense()).norm() < 1e-10);
    }

    #[test]
    fn hermitian_tag_is_checked() {
        let s = make_space(&[3]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        assert!(a.clone().with_hermitian_tag(true).is_err());
        assert!(number_operator(&s, 0).unwrap().with_hermitian_tag(true).is_ok());
    }
}
