//! Truncated Fock-space simulation of nonlinear quantum optics: χ⁽²⁾ and
//! χ⁽³⁾ models, closed-form results checked against brute-force evolution,
//! nonclassicality diagnostics, the parametric oscillator, classical media
//! and quantum solitons.
//!
//! Conventions: ħ = 1; multimode amplitudes are row-major with mode 0
//! slowest; `X(φ) = (e^{iφ}a† + e^{-iφ}a)/2` has vacuum variance 1/4, while
//! `x = (a + a†)/√2` and `p = (a - a†)/(i√2)`.

// `!(x < limit)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical_media;
pub mod cli;
pub mod closed_form;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod fock;
pub mod linalg;
pub mod models;
pub mod oscillator;
pub mod soliton;
pub mod validation;

pub use error::{Error, Result};
