//! Propagators `exp(-iHt)` for hermitian generators.

use nalgebra::{DMatrix, DVector};

use super::{vec_norm, C64};
use crate::error::{Error, Result};

/// Spectral decomposition of a dense hermitian matrix, reusable across times.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn new(h: &DMatrix<C64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Contract("eigendecomposition needs a square matrix".into()));
        }
        let eig = h.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite eigenvalue".into()));
        }
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// `exp(-i H t) v`
    pub fn propagate(&self, t: f64, v: &[C64]) -> Vec<C64> {
        let vin = DVector::from_column_slice(v);
        let mut coeffs = self.vectors.adjoint() * vin;
        for (c, &e) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= C64::new(0.0, -e * t).exp();
        }
        (&self.vectors * coeffs).as_slice().to_vec()
    }

    /// Dense `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let phases = DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| C64::new(0.0, -e * t).exp()),
        );
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.vectors.adjoint()
    }
}

/// `exp(-i H tau) v` by substepped Taylor series. `apply` computes `H x`;
/// `norm` must bound the induced norm of `H`.
pub fn expmv_taylor<F>(apply: F, norm: f64, tau: f64, v: &[C64]) -> Result<Vec<C64>>
where
    F: Fn(&[C64], &mut [C64]),
{
    const MAX_TERMS: usize = 60;
    let n = v.len();
    let substeps = (norm * tau.abs()).ceil().max(1.0) as usize;
    let dt = tau / substeps as f64;
    let factor = C64::new(0.0, -dt);
    let mut out = v.to_vec();
    let mut term = vec![C64::new(0.0, 0.0); n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for _ in 0..substeps {
        term.copy_from_slice(&out);
        let mut converged = false;
        for k in 1..=MAX_TERMS {
            apply(&term, &mut buf);
            let scale = factor / k as f64;
            for (t, b) in term.iter_mut().zip(&buf) {
                *t = *b * scale;
            }
            for (o, t) in out.iter_mut().zip(&term) {
                *o += *t;
            }
            if vec_norm(&term) <= 1e-17 * vec_norm(&out).max(1e-300) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric("Taylor propagator did not converge".into()));
        }
        if out.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::Numeric("non-finite amplitude in propagator".into()));
        }
    }
    Ok(out)
}
