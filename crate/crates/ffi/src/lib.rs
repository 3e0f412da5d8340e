//! C ABI over `nlo_quanta`.
//!
//! Objects are opaque handles created by `nq_*_new`/constructor calls and
//! released with the matching `nq_*_free`. Every fallible call returns an
//! [`NqStatus`]; on failure `nq_last_error` holds a message for the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nlo_quanta::closed_form::{downconv_kernel, kerr_bs_optimum, max_squeezing};
use nlo_quanta::diagnostics::{duan_simon_sum, mandel_excess, quadrature_squeezing};
use nlo_quanta::evolve::evolve_pure;
use nlo_quanta::fock::{coherent_state, fock_state, make_space, QuantumState, SpaceDescriptor};
use nlo_quanta::linalg::C64;
use nlo_quanta::models::{h_kerr_single, h_two_mode_chi2, ModelSpec};
use nlo_quanta::oscillator::{below_threshold_squeezing, DpoParams};
use nlo_quanta::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Truncation = 3,
    Domain = 4,
    Numeric = 5,
    Ambiguous = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Truncated Fock space.
pub struct NqSpace(SpaceDescriptor);
/// Pure or mixed state on an `NqSpace`.
pub struct NqState(QuantumState);
/// Hamiltonian model with its conserved charges.
pub struct NqModel(ModelSpec);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> NqStatus {
    match e {
        Error::Truncation { .. } => NqStatus::Truncation,
        Error::Domain(_) => NqStatus::Domain,
        Error::Numeric(_) | Error::Invariant(_) => NqStatus::Numeric,
        Error::Ambiguous { .. } => NqStatus::Ambiguous,
        _ => NqStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NqStatus, String)>) -> NqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NqStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            NqStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (NqStatus, String)>;
}

impl<T> IntoFfi<T> for nlo_quanta::Result<T> {
    fn ffi(self) -> Result<T, (NqStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (NqStatus, String) {
    (NqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NqStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (NqStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], (NqStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated) and stores the message length, excluding the terminator, in
/// `len`. Returns `BufferTooSmall` if `buf_len` cannot hold it.
///
/// # Safety
/// `buf` must be valid for `buf_len` bytes or null with `buf_len == 0`;
/// `len` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn nq_last_error(buf: *mut c_char, buf_len: usize, len: *mut usize) -> NqStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    if !len.is_null() {
        len.write(msg.len());
    }
    if buf_len < msg.len() + 1 {
        return NqStatus::BufferTooSmall;
    }
    if buf.is_null() {
        return NqStatus::NullPointer;
    }
    ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, msg.len());
    buf.add(msg.len()).write(0);
    NqStatus::Ok
}

/// # Safety
/// `dims` must point to `n_modes` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_space_new(dims: *const usize, n_modes: usize, out: *mut *mut NqSpace) -> NqStatus {
    guard(|| {
        let d = slice(dims, n_modes, "dims")?;
        let s = make_space(d).ffi()?;
        write_out(out, Box::into_raw(Box::new(NqSpace(s))), "out")
    })
}

/// # Safety
/// `space` must come from `nq_space_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nq_space_free(space: *mut NqSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Total Hilbert-space dimension.
///
/// # Safety
/// `space` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nq_space_dim(space: *const NqSpace, out: *mut usize) -> NqStatus {
    guard(|| {
        let s = as_ref(space, "space")?;
        write_out(out, s.0.total_dim(), "out")
    })
}

/// Product coherent state with amplitudes `re[i] + i·im[i]`, one per mode.
///
/// # Safety
/// `re` and `im` must point to `n` values; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn nq_state_coherent(
    space: *const NqSpace,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut NqState,
) -> NqStatus {
    guard(|| {
        let s = as_ref(space, "space")?;
        let (re, im) = (slice(re, n, "re")?, slice(im, n, "im")?);
        let amps: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
        let st = coherent_state(&s.0, &amps).ffi()?;
        write_out(out, Box::into_raw(Box::new(NqState(st))), "out")
    })
}

/// # Safety
/// `occupation` must point to `n` values; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn nq_state_fock(
    space: *const NqSpace,
    occupation: *const usize,
    n: usize,
    out: *mut *mut NqState,
) -> NqStatus {
    guard(|| {
        let s = as_ref(space, "space")?;
        let st = fock_state(&s.0, slice(occupation, n, "occupation")?).ffi()?;
        write_out(out, Box::into_raw(Box::new(NqState(st))), "out")
    })
}

/// # Safety
/// `state` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nq_state_free(state: *mut NqState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// `⟨n̂⟩` of `mode`.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_state_mean_number(state: *const NqState, mode: usize, out: *mut f64) -> NqStatus {
    guard(|| {
        let st = as_ref(state, "state")?;
        let p = st.0.number_distribution(mode).ffi()?;
        write_out(out, p.iter().enumerate().map(|(n, w)| n as f64 * w).sum(), "out")
    })
}

/// `Var(n̂) - ⟨n̂⟩` of `mode`; negative means sub-Poissonian.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_state_mandel_excess(state: *const NqState, mode: usize, out: *mut f64) -> NqStatus {
    guard(|| {
        let st = as_ref(state, "state")?;
        write_out(out, mandel_excess(&st.0, mode).ffi()?.value, "out")
    })
}

/// `Var X(φ)`, vacuum value 1/4.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_state_quadrature_variance(
    state: *const NqState,
    mode: usize,
    phi: f64,
    out: *mut f64,
) -> NqStatus {
    guard(|| {
        let st = as_ref(state, "state")?;
        write_out(out, quadrature_squeezing(&st.0, mode, phi).ffi()?.value, "out")
    })
}

/// `[Δ(x_a + x_b)]² + [Δ(p_a - p_b)]²`; below 2 means entangled.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_state_duan_simon_sum(
    state: *const NqState,
    mode_a: usize,
    mode_b: usize,
    out: *mut f64,
) -> NqStatus {
    guard(|| {
        let st = as_ref(state, "state")?;
        write_out(out, duan_simon_sum(&st.0, mode_a, mode_b).ffi()?.value, "out")
    })
}

/// Single-mode Kerr Hamiltonian `ωa†a + κa†²a²`.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_model_kerr(space: *const NqSpace, omega: f64, kappa: f64, out: *mut *mut NqModel) -> NqStatus {
    guard(|| {
        let s = as_ref(space, "space")?;
        let m = h_kerr_single(&s.0, omega, kappa).ffi()?;
        write_out(out, Box::into_raw(Box::new(NqModel(m))), "out")
    })
}

/// Degenerate two-mode χ⁽²⁾ Hamiltonian; mode 0 is the signal, mode 1 the pump.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_model_two_mode_chi2(
    space: *const NqSpace,
    omega: f64,
    kappa: f64,
    out: *mut *mut NqModel,
) -> NqStatus {
    guard(|| {
        let s = as_ref(space, "space")?;
        let m = h_two_mode_chi2(&s.0, omega, kappa).ffi()?;
        write_out(out, Box::into_raw(Box::new(NqModel(m))), "out")
    })
}

/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nq_model_free(model: *mut NqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evolves `state` under `model` for time `t`; the result is a new handle.
///
/// # Safety
/// Handles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_evolve(
    model: *const NqModel,
    state: *const NqState,
    t: f64,
    out: *mut *mut NqState,
) -> NqStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let st = as_ref(state, "state")?;
        let ev = evolve_pure(&m.0, &st.0, &[t]).ffi()?;
        let fin = ev
            .final_state
            .ok_or_else(|| (NqStatus::Numeric, "evolution returned no state".to_string()))?;
        write_out(out, Box::into_raw(Box::new(NqState(fin))), "out")
    })
}

/// Optimum of the pump-noise-limited squeezing for `np` pump photons.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_max_squeezing(np: f64, u_star: *mut f64, var_min: *mut f64) -> NqStatus {
    guard(|| {
        let m = max_squeezing(np).ffi()?;
        write_out(u_star, m.u_star, "u_star")?;
        write_out(var_min, m.var_min, "var_min")
    })
}

/// Closed-form optimum of the Kerr beam-splitter scheme. Returns `Domain`
/// (with the values still written) when `|α|φ` is outside the range where
/// the expansion holds.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_kerr_bs_optimum(
    alpha: f64,
    phi: f64,
    excess: *mut f64,
    r_opt: *mut f64,
    eta_opt: *mut f64,
) -> NqStatus {
    guard(|| {
        let o = kerr_bs_optimum(alpha, phi);
        write_out(excess, o.excess, "excess")?;
        write_out(r_opt, o.r_opt, "r_opt")?;
        write_out(eta_opt, o.eta_opt, "eta_opt")?;
        match o.warning {
            Some(w) => Err((NqStatus::Domain, w)),
            None => Ok(()),
        }
    })
}

/// Linearized `(ΔX₂)²` of the oscillator signal below threshold.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_dpo_squeezing(kappa: f64, e0: f64, gamma_a: f64, gamma_b: f64, out: *mut f64) -> NqStatus {
    guard(|| {
        let p = DpoParams::new(kappa, e0, gamma_a, gamma_b).ffi()?;
        write_out(out, below_threshold_squeezing(&p).ffi()?, "out")
    })
}

/// Pair-correlation kernel at separation `delta_z`.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn nq_downconv_kernel(delta_z: f64, k0: f64, re: *mut f64, im: *mut f64) -> NqStatus {
    guard(|| {
        let v = downconv_kernel(delta_z, k0).ffi()?.value;
        write_out(re, v.re, "re")?;
        write_out(im, v.im, "im")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 256];
        let mut len = 0;
        unsafe { nq_last_error(buf.as_mut_ptr(), buf.len(), &mut len) };
        let bytes: Vec<u8> = buf[..len].iter().map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn kerr_evolution_through_handles() {
        unsafe {
            let mut space = ptr::null_mut();
            assert_eq!(nq_space_new([40usize].as_ptr(), 1, &mut space), NqStatus::Ok);
            let mut dim = 0;
            assert_eq!(nq_space_dim(space, &mut dim), NqStatus::Ok);
            assert_eq!(dim, 40);
            let mut st = ptr::null_mut();
            assert_eq!(nq_state_coherent(space, [1.5].as_ptr(), [0.0].as_ptr(), 1, &mut st), NqStatus::Ok);
            let mut model = ptr::null_mut();
            assert_eq!(nq_model_kerr(space, 0.0, 1.0, &mut model), NqStatus::Ok);
            let mut out = ptr::null_mut();
            assert_eq!(nq_evolve(model, st, 0.3, &mut out), NqStatus::Ok);
            let (mut n0, mut n1, mut q) = (0.0, 0.0, 0.0);
            nq_state_mean_number(st, 0, &mut n0);
            nq_state_mean_number(out, 0, &mut n1);
            assert!((n0 - 2.25).abs() < 1e-10 && (n1 - n0).abs() < 1e-10);
            assert_eq!(nq_state_mandel_excess(out, 0, &mut q), NqStatus::Ok);
            assert!(q.abs() < 1e-9);
            nq_state_free(out);
            nq_state_free(st);
            nq_model_free(model);
            nq_space_free(space);
        }
    }

    #[test]
    fn errors_are_reported() {
        unsafe {
            let mut space = ptr::null_mut();
            assert_eq!(nq_space_new([0usize].as_ptr(), 1, &mut space), NqStatus::InvalidArgument);
            assert!(!last_error().is_empty());
            assert_eq!(nq_space_new(ptr::null(), 2, &mut space), NqStatus::NullPointer);
            assert_eq!(last_error(), "dims is null");
            let mut v = 0.0;
            assert_eq!(nq_dpo_squeezing(1.0, 2.0, 1.0, 1.0, &mut v), NqStatus::Domain);
            assert_eq!(nq_max_squeezing(1e4, ptr::null_mut(), &mut v), NqStatus::NullPointer);
            let mut len = 0;
            assert_eq!(nq_last_error(ptr::null_mut(), 0, &mut len), NqStatus::BufferTooSmall);
            assert_eq!(len, "u_star is null".len());
        }
    }

    #[test]
    fn closed_forms() {
        unsafe {
            let (mut u, mut v) = (0.0, 0.0);
            assert_eq!(nq_max_squeezing(1e4, &mut u, &mut v), NqStatus::Ok);
            assert!((v - 1.25e-3).abs() < 1e-15);
            let (mut e, mut r, mut eta) = (0.0, 0.0, 0.0);
            assert_eq!(nq_kerr_bs_optimum(4.0, 0.25, &mut e, &mut r, &mut eta), NqStatus::Ok);
            assert!(e < 0.0);
            assert_eq!(nq_kerr_bs_optimum(40.0, 0.25, &mut e, &mut r, &mut eta), NqStatus::Domain);
            let mut sq = 0.0;
            assert_eq!(nq_dpo_squeezing(1.0, 0.5, 1.0, 1.0, &mut sq), NqStatus::Ok);
            assert!((sq - 1.0 / 6.0).abs() < 1e-12);
            let (mut re, mut im) = (0.0, 0.0);
            assert_eq!(nq_downconv_kernel(0.0, 2.0, &mut re, &mut im), NqStatus::Ok);
            assert!((re - 8.0 / 6.0).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }

    #[test]
    fn squeezing_and_entanglement_queries() {
        unsafe {
            let mut space = ptr::null_mut();
            nq_space_new([6usize, 6].as_ptr(), 2, &mut space);
            let mut vac = ptr::null_mut();
            assert_eq!(nq_state_fock(space, [0usize, 0].as_ptr(), 2, &mut vac), NqStatus::Ok);
            let (mut var, mut sum) = (0.0, 0.0);
            nq_state_quadrature_variance(vac, 1, 0.4, &mut var);
            nq_state_duan_simon_sum(vac, 0, 1, &mut sum);
            assert!((var - 0.25).abs() < 1e-12 && (sum - 2.0).abs() < 1e-12);
            let mut model = ptr::null_mut();
            assert_eq!(nq_model_two_mode_chi2(space, 1.0, 0.5, &mut model), NqStatus::Ok);
            nq_model_free(model);
            nq_state_free(vac);
            nq_space_free(space);
        }
    }
}
