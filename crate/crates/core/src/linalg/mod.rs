//! Numerical kernels: sparse storage, propagators and an adaptive integrator.

pub mod expm;
pub mod ode;
pub mod sparse;

pub use num_complex::Complex64 as C64;

pub(crate) fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
