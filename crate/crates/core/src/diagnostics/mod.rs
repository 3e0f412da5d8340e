//! Nonclassicality, squeezing, entanglement and symmetry tests, plus the
//! Husimi Q function.
//!
//! `X(φ)` carries the factor 1/2 (vacuum variance 1/4) while the `x`, `p`
//! used by the two-mode criteria carry 1/√2 (vacuum variance 1/2).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::EvolutionResult;
use crate::fock::state::coherent_amplitudes;
use crate::fock::{momentum, number_operator, position, quadrature, rotation, QuantumState, StateData};
use crate::linalg::C64;
use crate::models::ModelSpec;

/// Slack on every strict inequality.
pub const VERDICT_SLACK: f64 = 1e-12;
/// Tolerated violation of the charge-derived fluctuation bounds.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nonclassical,
    Entangled,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub components: BTreeMap<String, f64>,
}

impl CriterionReport {
    /// Verdict fires when `value < threshold - slack`.
    fn below(name: &str, value: f64, threshold: f64, slack: f64, positive: Verdict) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            verdict: if value < threshold - slack { positive } else { Verdict::Inconclusive },
            components: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.components.insert(key.into(), v);
        self
    }

    pub fn is_positive(&self) -> bool {
        self.verdict != Verdict::Inconclusive
    }
}

fn distinct(state: &QuantumState, a: usize, b: usize) -> Result<()> {
    state.space().check_mode(a)?;
    state.space().check_mode(b)?;
    if a == b {
        return Err(Error::Contract(format!("criterion needs two distinct modes, got {a} twice")));
    }
    Ok(())
}

/// `(Δn)² - ⟨n̂⟩`; negative means sub-Poissonian.
pub fn mandel_excess(state: &QuantumState, mode: usize) -> Result<CriterionReport> {
    let n = number_operator(state.space(), mode)?;
    let mean = state.expectation(&n)?.re;
    let var = state.variance(&n)?;
    Ok(CriterionReport::below("mandel_excess", var - mean, 0.0, VERDICT_SLACK, Verdict::Nonclassical)
        .with("mean_n", mean)
        .with("var_n", var))
}

/// `(ΔX(φ))²` against the vacuum value 1/4.
pub fn quadrature_squeezing(state: &QuantumState, mode: usize, phi: f64) -> Result<CriterionReport> {
    let x = quadrature(state.space(), mode, phi)?;
    let v = state.variance(&x)?;
    Ok(CriterionReport::below("quadrature_squeezing", v, 0.25, VERDICT_SLACK, Verdict::Nonclassical).with("phi", phi))
}

fn duan_parts(state: &QuantumState, a: usize, b: usize) -> Result<(f64, f64)> {
    distinct(state, a, b)?;
    let s = state.space();
    let xs = position(s, a)?.add(&position(s, b)?)?.with_hermitian_tag(true)?;
    let pd = momentum(s, a)?.sub(&momentum(s, b)?)?.with_hermitian_tag(true)?;
    Ok((state.variance(&xs)?, state.variance(&pd)?))
}

/// `[Δ(x_a + x_b)]² + [Δ(p_a - p_b)]²`; below 2 means entangled.
pub fn duan_simon_sum(state: &QuantumState, mode_a: usize, mode_b: usize) -> Result<CriterionReport> {
    let (vx, vp) = duan_parts(state, mode_a, mode_b)?;
    Ok(CriterionReport::below("duan_simon_sum", vx + vp, 2.0, VERDICT_SLACK, Verdict::Entangled)
        .with("var_x_sum", vx)
        .with("var_p_diff", vp))
}

/// `[Δ(x_a + x_b)]² · [Δ(p_a - p_b)]²`; below 1 means entangled.
pub fn epr_product(state: &QuantumState, mode_a: usize, mode_b: usize) -> Result<CriterionReport> {
    let (vx, vp) = duan_parts(state, mode_a, mode_b)?;
    Ok(CriterionReport::below("epr_product", vx * vp, 1.0, VERDICT_SLACK, Verdict::Entangled)
        .with("var_x_sum", vx)
        .with("var_p_diff", vp))
}

/// `Var(n̂_a - n̂_b) - ⟨n̂_a⟩ - ⟨n̂_b⟩`; negative means nonclassical.
pub fn number_diff_criterion(state: &QuantumState, mode_a: usize, mode_b: usize) -> Result<CriterionReport> {
    distinct(state, mode_a, mode_b)?;
    let s = state.space();
    let na = number_operator(s, mode_a)?;
    let nb = number_operator(s, mode_b)?;
    let diff = na.sub(&nb)?.with_hermitian_tag(true)?;
    let var = state.variance(&diff)?;
    let ma = state.expectation(&na)?.re;
    let mb = state.expectation(&nb)?.re;
    Ok(
        CriterionReport::below("number_diff", var - ma - mb, 0.0, VERDICT_SLACK, Verdict::Nonclassical)
            .with("var_diff", var)
            .with("mean_a", ma)
            .with("mean_b", mb),
    )
}

/// `⟨Q_o⟩ - ⟨Q'_e⟩`, odd population minus nonzero-even population; a classical
/// state has it non-negative.
pub fn parity_test(state: &QuantumState, mode: usize) -> Result<CriterionReport> {
    let p = state.number_distribution(mode)?;
    let odd: f64 = p.iter().skip(1).step_by(2).sum();
    let even: f64 = p.iter().skip(2).step_by(2).sum();
    Ok(
        CriterionReport::below("parity", odd - even, 0.0, VERDICT_SLACK, Verdict::Nonclassical)
            .with("q_odd", odd)
            .with("q_even_nonzero", even),
    )
}

/// `max|ρ - U ρ U†|` for `U = e^{iπ n̂/n}` on `mode`.
pub fn rotation_invariance(state: &QuantumState, mode: usize, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("symmetry order must be positive".into()));
    }
    let u = rotation(state.space(), mode, PI / n as f64)?;
    state.to_density().max_abs_diff(&state.to_density().transform(&u)?)
}

/// One line of a fluctuation bound `upper ≥ middle ≥ lower`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub upper: f64,
    pub middle: f64,
    pub lower: f64,
}

impl BoundCheck {
    /// Smallest margin of the two inequalities (negative when violated).
    pub fn slack(&self) -> f64 {
        (self.upper - self.middle).min(self.middle - self.lower)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSample {
    pub t: f64,
    pub checks: Vec<BoundCheck>,
}

fn stdev(state: &QuantumState, op: &crate::fock::FieldOperator) -> Result<f64> {
    Ok(state.variance(op)?.max(0.0).sqrt())
}

/// Number-fluctuation bounds implied by a conserved charge, at every sample.
///
/// With `charge = "M"` on a two-mode model carrying `M = n̂_a + k n̂_b`:
/// `kΔn_b + ΔM(0) ≥ Δn_a ≥ |kΔn_b - ΔM(0)|`. With `"M1"` or `"M2"` on the
/// three-mode model (modes pump c, signal a, idler b), the pump bounds through
/// `K₁ = n̂_c + n̂_a`, `K₂ = n̂_c + n̂_b` and `ΔM₁(0) ≥ |Δn_a - Δn_b|` are checked.
/// `ΔM(0)` is read from the first sample. Any violation beyond `BOUND_TOL`
/// is an invariant failure.
pub fn fluctuation_bounds(evolution: &EvolutionResult, model: &ModelSpec, charge: &str) -> Result<Vec<BoundSample>> {
    if model.charge(charge).is_none() {
        return Err(Error::Contract(format!("model {} carries no charge named {charge}", model.name)));
    }
    if evolution.states.len() != evolution.times.len() || evolution.states.is_empty() {
        return Err(Error::Contract("fluctuation bounds need the sampled states".into()));
    }
    let s = &model.space;
    let first = &evolution.states[0];
    let mut out = Vec::with_capacity(evolution.times.len());
    match charge {
        "M" => {
            let m = model.charge("M").expect("checked above");
            if s.n_modes() != 2 {
                return Err(Error::Contract("charge M bounds need a two-mode model".into()));
            }
            let na = number_operator(s, 0)?;
            let nb = number_operator(s, 1)?;
            // weight of n̂_b inside M
            let k = m.get(s.stride(1), s.stride(1)).re;
            let dm0 = stdev(first, m)?;
            for (st, &t) in evolution.states.iter().zip(&evolution.times) {
                let da = stdev(st, &na)?;
                let db = stdev(st, &nb)?;
                out.push(BoundSample {
                    t,
                    checks: vec![BoundCheck {
                        name: "signal".into(),
                        upper: k * db + dm0,
                        middle: da,
                        lower: (k * db - dm0).abs(),
                    }],
                });
            }
        }
        "M1" | "M2" => {
            let (m1, _) = (
                model.charge("M1").ok_or_else(|| Error::Contract("three-mode bounds need M1".into()))?,
                model.charge("M2").ok_or_else(|| Error::Contract("three-mode bounds need M2".into()))?,
            );
            let nc = number_operator(s, 0)?;
            let na = number_operator(s, 1)?;
            let nb = number_operator(s, 2)?;
            let k1 = nc.add(&na)?.with_hermitian_tag(true)?;
            let k2 = nc.add(&nb)?.with_hermitian_tag(true)?;
            let dk1 = stdev(first, &k1)?;
            let dk2 = stdev(first, &k2)?;
            let dm1 = stdev(first, m1)?;
            for (st, &t) in evolution.states.iter().zip(&evolution.times) {
                let dc = stdev(st, &nc)?;
                let da = stdev(st, &na)?;
                let db = stdev(st, &nb)?;
                out.push(BoundSample {
                    t,
                    checks: vec![
                        BoundCheck {
                            name: "signal_pump".into(),
                            upper: dc + dk1,
                            middle: da,
                            lower: (dc - dk1).abs(),
                        },
                        BoundCheck {
                            name: "idler_pump".into(),
                            upper: dc + dk2,
                            middle: db,
                            lower: (dc - dk2).abs(),
                        },
                        BoundCheck {
                            name: "signal_idler".into(),
                            upper: dm1,
                            middle: (da - db).abs(),
                            lower: 0.0,
                        },
                    ],
                });
            }
        }
        other => return Err(Error::Contract(format!("no fluctuation bound is known for charge {other}"))),
    }
    for sample in &out {
        for c in &sample.checks {
            if c.slack() < -BOUND_TOL {
                return Err(Error::Invariant(format!(
                    "fluctuation bound {} violated at t = {} (slack {:.3e})",
                    c.name,
                    sample.t,
                    c.slack()
                )));
            }
        }
    }
    Ok(out)
}

/// Square lattice in the complex plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub center: (f64, f64),
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl PhaseGrid {
    pub fn new(center: C64, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || points_per_axis < 2 || !center.norm().is_finite() {
            return Err(Error::Parameter("phase grid needs a finite positive extent and ≥ 2 points".into()));
        }
        Ok(Self {
            center: (center.re, center.im),
            half_width,
            points_per_axis,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points_per_axis - 1) as f64
    }

    /// Points with the real part varying fastest.
    pub fn points(&self) -> Vec<C64> {
        let h = self.spacing();
        let n = self.points_per_axis;
        let (cx, cy) = self.center;
        (0..n)
            .flat_map(|j| {
                (0..n).map(move |i| {
                    C64::new(cx - self.half_width + i as f64 * h, cy - self.half_width + j as f64 * h)
                })
            })
            .collect()
    }
}

/// `Q(α) = ⟨α|ρ_mode|α⟩/π` at each point, with `ρ_mode` the reduced state.
pub fn husimi_q(state: &QuantumState, mode: usize, points: &[C64]) -> Result<Vec<f64>> {
    state.space().check_mode(mode)?;
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::Parameter("phase-space points must be finite".into()));
    }
    let reduced = if state.space().n_modes() == 1 {
        state.clone()
    } else {
        state.partial_trace(&[mode])?
    };
    let dim = reduced.space().total_dim();
    let q = |alpha: &C64| -> f64 {
        let c: Vec<C64> = coherent_amplitudes(*alpha, dim);
        let v = match reduced.data() {
            StateData::Pure(psi) => c.iter().zip(psi.iter()).map(|(a, p)| a.conj() * p).sum::<C64>().norm_sqr(),
            StateData::Density(m) => {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..dim {
                    let mut row = C64::new(0.0, 0.0);
                    for i in 0..dim {
                        row += c[i].conj() * m[(i, j)];
                    }
                    acc += row * c[j];
                }
                acc.re
            }
        };
        v / PI
    };
    Ok(points.par_iter().map(q).collect())
}
