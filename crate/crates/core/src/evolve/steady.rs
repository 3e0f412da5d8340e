//! Null space of the Liouvillian.

use nalgebra::DMatrix;

use super::Liouvillian;
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::linalg::C64;
use crate::models::ModelSpec;

#[derive(Clone, Debug)]
pub struct SteadyOptions {
    /// Hilbert dimensions up to this size use a dense SVD of the superoperator.
    pub dense_limit: usize,
    /// Required `max|L(ρ)|` of the returned state.
    pub residual_tol: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            dense_limit: 20,
            residual_tol: 1e-10,
            restart: 50,
            max_iterations: 40_000,
        }
    }
}

/// `max|L(ρ)|` for a density matrix.
pub fn liouvillian_residual(model: &ModelSpec, rho: &QuantumState) -> Result<f64> {
    let l = Liouvillian::new(model)?;
    Ok(l.apply(0.0, &rho.density_matrix()).camax())
}

pub fn steady_state(model: &ModelSpec) -> Result<QuantumState> {
    steady_state_with(model, &SteadyOptions::default())
}

/// Trace-one null vector of the Liouvillian.
///
/// Small spaces take the right singular vector of the smallest singular value
/// and count near-zero singular values to detect degeneracy. Larger spaces
/// solve `L(x) + Tr(x)P = P` by GMRES from two different starting points; a
/// unique null space makes the solves agree, otherwise the disagreement is
/// reported as ambiguity.
pub fn steady_state_with(model: &ModelSpec, opts: &SteadyOptions) -> Result<QuantumState> {
    if !model.has_dissipation() {
        return Err(Error::Contract(format!("model {} has no dissipator with positive rate", model.name)));
    }
    if model.is_time_dependent() {
        return Err(Error::Contract("steady state needs a static generator".into()));
    }
    let liou = Liouvillian::new(model)?;
    let dim = liou.dim();
    let rho = if dim <= opts.dense_limit {
        dense_null_vector(&liou)?
    } else {
        let maximally_mixed = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        let mut vacuum = DMatrix::zeros(dim, dim);
        vacuum[(0, 0)] = C64::new(1.0, 0.0);
        let first = gmres_steady(&liou, &maximally_mixed, opts)?;
        let second = gmres_steady(&liou, &vacuum, opts)?;
        let spread = (&first - &second).camax();
        if spread > 1e3 * opts.residual_tol {
            return Err(Error::Ambiguous { dimension: 2 });
        }
        first
    };
    let rho = finalize(rho);
    let residual = liou.apply(0.0, &rho).camax();
    if !(residual < opts.residual_tol) {
        return Err(Error::Numeric(format!(
            "steady-state residual {residual:.3e} exceeds {:.1e}",
            opts.residual_tol
        )));
    }
    QuantumState::density(&model.space, rho)
}

fn finalize(x: DMatrix<C64>) -> DMatrix<C64> {
    let h = (&x + x.adjoint()) * C64::new(0.5, 0.0);
    let tr = h.trace();
    h / tr
}

fn dense_null_vector(liou: &Liouvillian) -> Result<DMatrix<C64>> {
    let d = liou.dim();
    let n = d * d;
    let mut sup = DMatrix::<C64>::zeros(n, n);
    let mut basis = DMatrix::<C64>::zeros(d, d);
    for col in 0..n {
        basis[col] = C64::new(1.0, 0.0);
        let image = liou.apply(0.0, &basis);
        sup.set_column(col, &nalgebra::DVector::from_column_slice(image.as_slice()));
        basis[col] = C64::new(0.0, 0.0);
    }
    let svd = sup.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let sigma = &svd.singular_values;
    let tol = 1e-9 * sigma.max().max(1.0);
    let null_dim = sigma.iter().filter(|&&s| s < tol).count();
    if null_dim > 1 {
        return Err(Error::Ambiguous { dimension: null_dim });
    }
    let k = sigma.imin();
    let v: Vec<C64> = v_t.row(k).iter().map(|z| z.conj()).collect();
    Ok(DMatrix::from_column_slice(d, d, &v))
}

/// Right-preconditioned restarted GMRES for `L(x) + Tr(x)·I/d = I/d`.
fn gmres_steady(liou: &Liouvillian, x0: &DMatrix<C64>, opts: &SteadyOptions) -> Result<DMatrix<C64>> {
    let d = liou.dim();
    let n = d * d;
    let p = C64::new(1.0 / d as f64, 0.0);
    let diag = liou.diagonal();
    let precond: Vec<C64> = (0..n)
        .map(|idx| {
            let (i, j) = (idx % d, idx / d);
            let mut v = diag[i] + diag[j].conj();
            if i == j {
                v += p;
            }
            if v.norm() < 1e-14 {
                C64::new(1.0, 0.0)
            } else {
                1.0 / v
            }
        })
        .collect();
    let apply_a = |x: &[C64]| -> Vec<C64> {
        let m = DMatrix::from_column_slice(d, d, x);
        let tr: C64 = (0..d).map(|i| m[(i, i)]).sum();
        let mut out = liou.apply(0.0, &m);
        for i in 0..d {
            out[(i, i)] += tr * p;
        }
        out.as_slice().to_vec()
    };
    let mut b = vec![C64::new(0.0, 0.0); n];
    for i in 0..d {
        b[i * d + i] = p;
    }
    let bnorm = norm(&b);
    let tol = 1e-2 * opts.residual_tol * bnorm;
    let mut x = x0.as_slice().to_vec();
    let m = opts.restart.max(2);
    let mut iterations = 0;
    loop {
        let ax = apply_a(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta <= tol {
            return Ok(DMatrix::from_column_slice(d, d, &x));
        }
        if iterations >= opts.max_iterations {
            return Err(Error::Numeric(format!(
                "GMRES stalled at residual {:.3e} after {iterations} iterations",
                beta / bnorm
            )));
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![C64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![C64::new(0.0, 0.0); m];
        let mut g = vec![C64::new(0.0, 0.0); m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            iterations += 1;
            let z: Vec<C64> = v[k].iter().zip(&precond).map(|(a, q)| a * q).collect();
            let mut w = apply_a(&z);
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(vi, &w);
                h[i][k] = hik;
                w.iter_mut().zip(vi).for_each(|(wj, vj)| *wj -= hik * vj);
            }
            let hn = norm(&w);
            h[k + 1][k] = C64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = C64::new(0.0, 0.0);
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            k_used = k + 1;
            if g[k + 1].norm() <= tol || hn == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        let mut y = vec![C64::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&v) {
            for ((xj, vj), q) in x.iter_mut().zip(vi).zip(&precond) {
                *xj += yi * vj * q;
            }
        }
    }
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
