//! Adaptive Dormand–Prince 5(4) integrator over flat complex state vectors.

use super::C64;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Dp5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dp5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dp5Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for &(c, k) in terms {
            s += k[i] * c;
        }
        *o = y[i] + s * h;
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0`, calling `observer` at each time in
/// `t_out` (which must be non-decreasing and ≥ `t0`). `y` holds the state at
/// the last output time on return.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y: &mut Vec<C64>,
    t_out: &[f64],
    opts: &Dp5Options,
    mut observer: O,
) -> Result<Dp5Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]),
{
    let n = y.len();
    let mut stats = Dp5Stats::default();
    let mut k = vec![vec![C64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut ynew = vec![C64::new(0.0, 0.0); n];
    let mut t = t0;

    if let Some(w) = t_out.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::Contract(format!(
            "output times must be non-decreasing ({} after {})",
            w[1], w[0]
        )));
    }
    if t_out.first().is_some_and(|&t1| t1 < t0) {
        return Err(Error::Contract("output times precede the initial time".into()));
    }

    f(t, y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = opts.h_init.unwrap_or_else(|| {
        let ynorm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let fnorm = k[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if fnorm > 0.0 {
            (0.01 * (ynorm.max(1e-6)) / fnorm).min(opts.h_max)
        } else {
            opts.h_max.min(1e-3)
        }
    });

    for (idx, &target) in t_out.iter().enumerate() {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Numeric(format!(
                    "step budget exhausted at t = {t:.6e} (target {target:.6e}, h = {h:.3e})"
                )));
            }
            let remaining = target - t;
            let mut last = false;
            let mut hs = h.min(opts.h_max);
            if hs >= remaining {
                hs = remaining;
                last = true;
            }
            if !(hs > 0.0) || !hs.is_finite() {
                return Err(Error::Numeric(format!("step size collapsed at t = {t:.6e}")));
            }
            let (k0, rest) = k.split_at_mut(1);
            let k0 = &k0[0];
            let [k1, k2, k3, k4, k5, k6] = rest else { unreachable!() };

            combine(&mut tmp, y, hs, &[(A21, k0.as_slice())]);
            f(t + C2 * hs, &tmp, k1);
            combine(&mut tmp, y, hs, &[(A31, k0.as_slice()), (A32, k1.as_slice())]);
            f(t + C3 * hs, &tmp, k2);
            combine(&mut tmp, y, hs, &[(A41, k0.as_slice()), (A42, k1.as_slice()), (A43, k2.as_slice())]);
            f(t + C4 * hs, &tmp, k3);
            combine(&mut tmp, y, hs, &[(A51, k0.as_slice()), (A52, k1.as_slice()), (A53, k2.as_slice()), (A54, k3.as_slice())]);
            f(t + C5 * hs, &tmp, k4);
            combine(
                &mut tmp,
                y,
                hs,
                &[(A61, k0.as_slice()), (A62, k1.as_slice()), (A63, k2.as_slice()), (A64, k3.as_slice()), (A65, k4.as_slice())],
            );
            f(t + hs, &tmp, k5);
            combine(
                &mut ynew,
                y,
                hs,
                &[(B1, k0.as_slice()), (B3, k2.as_slice()), (B4, k3.as_slice()), (B5, k4.as_slice()), (B6, k5.as_slice())],
            );
            f(t + hs, &ynew, k6);
            stats.evaluations += 6;

            let mut err = 0.0;
            for i in 0..n {
                let e = (k0[i] * E1 + k2[i] * E3 + k3[i] * E4 + k4[i] * E5 + k5[i] * E6 + k6[i] * E7)
                    * hs;
                let scale = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
                err += (e.norm() / scale).powi(2);
            }
            let err = (err / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite error estimate at t = {t:.6e}, h = {hs:.3e}"
                )));
            }

            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + hs };
                std::mem::swap(y, &mut ynew);
                let (first, tail) = k.split_at_mut(6);
                std::mem::swap(&mut first[0], &mut tail[0]);
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || grow < 1.0 {
                    h = hs * grow;
                }
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        observer(idx, t, y);
    }
    Ok(stats)
}
