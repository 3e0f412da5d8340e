//! Closed-form results: the parametric approximation and its pump-noise
//! limits, Kerr dynamics and the Kerr/beam-splitter scheme, and the
//! down-conversion pair kernel.

mod kernel;
mod kerr;
mod parametric;

pub use kernel::{downconv_kernel, downconv_kernel_oracle, envelope_decay_exponent, phase_match_h, KernelPoint};
pub use kerr::{
    kerr_bs_excess, kerr_bs_optimum, kerr_mean_amplitude, kerr_mean_amplitude_gaussian, qnd_phase_shift,
    KerrBsExcess, KerrBsOptimum, KERR_BS_VALIDITY,
};
pub use parametric::{
    corrected_var_x2, max_squeezing, max_squeezing_numeric, para_solution, para_variances, phase_averaged_var_x2,
    BogoliubovSolution, MaxSqueezing,
};
