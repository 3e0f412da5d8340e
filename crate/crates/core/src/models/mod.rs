//! Hamiltonians, dissipators and conserved charges of the χ² and χ³ models.
//!
//! Units have ħ = 1; every frequency and rate is angular.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, Error, Result};
use crate::fock::{annihilation, number_operator, FieldOperator, SpaceDescriptor};
use crate::linalg::C64;

/// Bound on `max|[H, M]|` for a charge to count as conserved.
pub const CHARGE_TOL: f64 = 1e-10;

/// Whether the free-field part of the Hamiltonian has been removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Lab,
    Interaction,
}

/// `op e^{-iωt} + op† e^{iωt}`, a hermitian time-dependent contribution.
#[derive(Clone, Debug)]
pub struct RotatingTerm {
    pub op: FieldOperator,
    pub frequency: f64,
}

#[derive(Clone, Debug)]
pub struct Dissipator {
    pub op: FieldOperator,
    pub rate: f64,
}

#[derive(Clone, Debug)]
pub struct Charge {
    pub name: String,
    pub op: FieldOperator,
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub space: SpaceDescriptor,
    pub hamiltonian: FieldOperator,
    pub rotating: Vec<RotatingTerm>,
    pub dissipators: Vec<Dissipator>,
    pub charges: Vec<Charge>,
    pub frame: Frame,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn require_modes(space: &SpaceDescriptor, n: usize, model: &str) -> Result<()> {
    if space.n_modes() == n {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "{model} needs {n} modes, the space has {}",
            space.n_modes()
        )))
    }
}

/// `K + K†`, tagged hermitian.
fn hermitian_part(k: &FieldOperator) -> Result<FieldOperator> {
    k.add(&k.adjoint())?.with_hermitian_tag(true)
}

fn weighted_numbers(space: &SpaceDescriptor, weights: &[f64]) -> Result<FieldOperator> {
    let mut acc = FieldOperator::zeros(space);
    for (mode, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            acc = acc.axpy(c(w, 0.0), &number_operator(space, mode)?)?;
        }
    }
    Ok(acc)
}

impl ModelSpec {
    fn new(name: &str, space: &SpaceDescriptor, hamiltonian: FieldOperator, frame: Frame) -> Self {
        Self {
            name: name.into(),
            space: space.clone(),
            hamiltonian,
            rotating: Vec::new(),
            dissipators: Vec::new(),
            charges: Vec::new(),
            frame,
        }
    }

    fn with_charge(mut self, name: &str, op: FieldOperator) -> Self {
        self.charges.push(Charge { name: name.into(), op });
        self
    }

    pub fn is_time_dependent(&self) -> bool {
        !self.rotating.is_empty()
    }

    pub fn has_dissipation(&self) -> bool {
        self.dissipators.iter().any(|d| d.rate > 0.0)
    }

    pub fn charge(&self, name: &str) -> Option<&FieldOperator> {
        self.charges.iter().find(|q| q.name == name).map(|q| &q.op)
    }

    /// `H(t)` as an operator.
    pub fn hamiltonian_at(&self, t: f64) -> Result<FieldOperator> {
        let mut h = self.hamiltonian.clone();
        for term in &self.rotating {
            let k = term.op.scale(C64::from_polar(1.0, -term.frequency * t));
            h = h.add(&hermitian_part(&k)?)?;
        }
        h.with_hermitian_tag(true)
    }

    /// Largest `max|[H, M]|` over the attached charges (rotating terms included).
    pub fn charge_defect(&self, charge: &FieldOperator) -> Result<f64> {
        let mut worst = self.hamiltonian.commutator(charge)?.max_abs();
        for term in &self.rotating {
            worst = worst.max(term.op.commutator(charge)?.max_abs());
            worst = worst.max(term.op.adjoint().commutator(charge)?.max_abs());
        }
        Ok(worst)
    }

    /// Asserts hermiticity and the commutation of every listed charge.
    pub fn validate(&self) -> Result<()> {
        let d = self.hamiltonian.hermiticity_defect();
        if d >= crate::fock::operator::HERMITIAN_TOL {
            return Err(Error::Invariant(format!("{}: hamiltonian defect {d:.3e}", self.name)));
        }
        for q in &self.charges {
            let defect = self.charge_defect(&q.op)?;
            if defect >= CHARGE_TOL {
                return Err(Error::Invariant(format!(
                    "{}: charge {} has max|[H, M]| = {defect:.3e}",
                    self.name, q.name
                )));
            }
        }
        for dsp in &self.dissipators {
            if !(dsp.rate >= 0.0) {
                return Err(Error::Parameter(format!("negative damping rate {}", dsp.rate)));
            }
        }
        Ok(())
    }

    fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}

/// `ω a†a + 2ω b†b + κ[(a†)²b + a²b†]` on modes (signal a, pump b), with
/// charge `M = n_a + 2 n_b`.
pub fn h_two_mode_chi2(space: &SpaceDescriptor, omega: f64, kappa: f64) -> Result<ModelSpec> {
    h_nphoton_inner(space, omega, kappa, 2, "two_mode_chi2")
}

/// Degenerate down-conversion in the interaction picture,
/// `i(κ/2)[b(a†)² - b†a²]`, with charge `M = n_a + 2 n_b`.
pub fn h_two_mode_chi2_interaction(space: &SpaceDescriptor, kappa: f64) -> Result<ModelSpec> {
    require_modes(space, 2, "two-mode chi2")?;
    let a = annihilation(space, 0)?;
    let b = annihilation(space, 1)?;
    let k = b.mul(&a.adjoint().pow(2)?)?.scale(c(0.0, kappa / 2.0));
    let m = weighted_numbers(space, &[1.0, 2.0])?;
    ModelSpec::new("two_mode_chi2_interaction", space, hermitian_part(&k)?, Frame::Interaction)
        .with_charge("M", m)
        .checked()
}

/// The interaction-picture down-converter with the pump written as
/// `b → β + b`, so mode 1 carries only the pump's deviation from the
/// coherent amplitude `β`. A strong pump then fits in a small truncation.
///
/// The displaced charge `n_a + 2(b+β)†(b+β)` is only conserved up to the
/// pump truncation, so no charge is attached.
pub fn h_two_mode_chi2_displaced(space: &SpaceDescriptor, kappa: f64, beta: C64) -> Result<ModelSpec> {
    require_modes(space, 2, "two-mode chi2")?;
    let a = annihilation(space, 0)?;
    let b = annihilation(space, 1)?;
    let ad2 = a.adjoint().pow(2)?;
    let shifted = b.axpy(beta, &FieldOperator::identity(space))?;
    let k = shifted.mul(&ad2)?.scale(c(0.0, kappa / 2.0));
    ModelSpec::new("two_mode_chi2_displaced", space, hermitian_part(&k)?, Frame::Interaction).checked()
}

/// `ω c†c + ω₁ a†a + ω₂ b†b + κ(c†ab + c a†b†)` on modes (pump c, signal a,
/// idler b) with `ω = ω₁ + ω₂`; charges `M1 = n_a - n_b`, `M2 = 2n_c + n_a + n_b`.
pub fn h_three_mode_chi2(space: &SpaceDescriptor, omega1: f64, omega2: f64, kappa: f64) -> Result<ModelSpec> {
    require_modes(space, 3, "three-mode chi2")?;
    let cp = annihilation(space, 0)?;
    let a = annihilation(space, 1)?;
    let b = annihilation(space, 2)?;
    let free = weighted_numbers(space, &[omega1 + omega2, omega1, omega2])?;
    let k = cp.mul(&a.adjoint())?.mul(&b.adjoint())?.scale(c(kappa, 0.0));
    let h = free.add(&hermitian_part(&k)?)?.with_hermitian_tag(true)?;
    ModelSpec::new("three_mode_chi2", space, h, Frame::Lab)
        .with_charge("M1", weighted_numbers(space, &[0.0, 1.0, -1.0])?)
        .with_charge("M2", weighted_numbers(space, &[2.0, 1.0, 1.0])?)
        .checked()
}

/// `ω a†a + (κ/2)(a†)²a²`, diagonal with eigenvalues `nω + n(n-1)κ/2`.
pub fn h_kerr_single(space: &SpaceDescriptor, omega: f64, kappa: f64) -> Result<ModelSpec> {
    require_modes(space, 1, "single-mode Kerr")?;
    let h = FieldOperator::number_function(space, 0, |n| {
        let n = n as f64;
        c(n * omega + 0.5 * kappa * n * (n - 1.0), 0.0)
    })?;
    ModelSpec::new("kerr_single", space, h, Frame::Lab)
        .with_charge("n_a", number_operator(space, 0)?)
        .checked()
}

/// `ω₁ a†a + ω₂ b†b + (κ/2) a†b†ab`, diagonal with eigenvalues
/// `nω₁ + mω₂ + κnm/2`.
pub fn h_kerr_cross(space: &SpaceDescriptor, omega1: f64, omega2: f64, kappa: f64) -> Result<ModelSpec> {
    require_modes(space, 2, "cross Kerr")?;
    let h = FieldOperator::from_triplets(
        space,
        (0..space.total_dim()).map(|i| {
            let n = space.occupation_of(i, 0) as f64;
            let m = space.occupation_of(i, 1) as f64;
            (i, i, c(n * omega1 + m * omega2 + 0.5 * kappa * n * m, 0.0))
        }),
        true,
    )?;
    ModelSpec::new("kerr_cross", space, h, Frame::Lab)
        .with_charge("n_a", number_operator(space, 0)?)
        .with_charge("n_b", number_operator(space, 1)?)
        .checked()
}

fn h_nphoton_inner(space: &SpaceDescriptor, omega: f64, kappa: f64, n: usize, name: &str) -> Result<ModelSpec> {
    require_modes(space, 2, name)?;
    if space.dim(0) <= n {
        return Err(Error::Truncation {
            mode: 0,
            tail: 1.0,
            tolerance: 0.0,
        });
    }
    let a = annihilation(space, 0)?;
    let b = annihilation(space, 1)?;
    let free = weighted_numbers(space, &[omega, n as f64 * omega])?;
    let k = a.adjoint().pow(n as u32)?.mul(&b)?.scale(c(kappa, 0.0));
    let h = free.add(&hermitian_part(&k)?)?.with_hermitian_tag(true)?;
    ModelSpec::new(name, space, h, Frame::Lab)
        .with_charge("M", weighted_numbers(space, &[1.0, n as f64])?)
        .checked()
}

/// `ω a†a + nω b†b + κ_n[(a†)ⁿb + aⁿb†]` with charge `M = n_a + n·n_b`.
pub fn h_nphoton(space: &SpaceDescriptor, omega: f64, kappa_n: f64, n: usize) -> Result<ModelSpec> {
    ensure_param(n >= 2, || format!("photon order {n} must be at least 2"))?;
    h_nphoton_inner(space, omega, kappa_n, n, "nphoton")
}

/// Parametric approximation in the rotating frame:
/// `i(κ/2)√N_p [e^{iφ_p}(a†)² - e^{-iφ_p}a²]` with `N_p = |β|²`.
pub fn h_parametric_classical_pump(space: &SpaceDescriptor, kappa: f64, beta: C64, phi_p: f64) -> Result<ModelSpec> {
    require_modes(space, 1, "parametric pump")?;
    ensure_param(beta.norm() > 0.0, || "pump amplitude must be nonzero".into())?;
    let a = annihilation(space, 0)?;
    let k = a
        .adjoint()
        .pow(2)?
        .scale(C64::from_polar(0.5 * kappa * beta.norm(), phi_p) * c(0.0, 1.0));
    ModelSpec::new("parametric_classical_pump", space, hermitian_part(&k)?, Frame::Interaction).checked()
}

/// Classical pump in the lab frame, `ω a†a + κ[β e^{-2iωt}(a†)² + h.c.]`,
/// held as a rotating term.
pub fn h_parametric_lab(space: &SpaceDescriptor, omega: f64, kappa: f64, beta: C64) -> Result<ModelSpec> {
    require_modes(space, 1, "parametric pump")?;
    ensure_param(beta.norm() > 0.0, || "pump amplitude must be nonzero".into())?;
    let a = annihilation(space, 0)?;
    let op = a.adjoint().pow(2)?.scale(beta * kappa);
    let mut m = ModelSpec::new("parametric_lab", space, number_operator(space, 0)?.scale(c(omega, 0.0)), Frame::Lab);
    m.rotating.push(RotatingTerm {
        op,
        frequency: 2.0 * omega,
    });
    m.checked()
}

/// Degenerate parametric oscillator on modes (signal a, pump b):
/// `i(κ/2)(b(a†)² - b†a²) + iE₀(b† - b)` with damping `(a, γ_a)`, `(b, γ_b)`.
pub fn dpo_model(space: &SpaceDescriptor, kappa: f64, e0: f64, gamma_a: f64, gamma_b: f64) -> Result<ModelSpec> {
    require_modes(space, 2, "parametric oscillator")?;
    ensure_param(gamma_a >= 0.0 && gamma_b >= 0.0, || {
        format!("damping rates must be non-negative (γ_a = {gamma_a}, γ_b = {gamma_b})")
    })?;
    let a = annihilation(space, 0)?;
    let b = annihilation(space, 1)?;
    let k = b
        .mul(&a.adjoint().pow(2)?)?
        .scale(c(0.0, kappa / 2.0))
        .axpy(c(0.0, e0), &b.adjoint())?;
    let mut m = ModelSpec::new("dpo", space, hermitian_part(&k)?, Frame::Interaction);
    m.dissipators.push(Dissipator { op: a, rate: gamma_a });
    m.dissipators.push(Dissipator { op: b, rate: gamma_b });
    m.checked()
}

/// The parametric oscillator with the pump written as `b → β₀ + b`, where
/// `β₀ = E₀/γ_b` is the below-threshold pump amplitude. The drive and the
/// coherent part of the pump damping cancel, leaving
/// `i(κ/2)[(β₀ + b)(a†)² - (β₀ + b)†a²]` with damping `(a, γ_a)`, `(b, γ_b)`.
/// Mode 1 then holds only the pump's quantum deviation.
pub fn dpo_model_displaced(space: &SpaceDescriptor, kappa: f64, e0: f64, gamma_a: f64, gamma_b: f64) -> Result<ModelSpec> {
    require_modes(space, 2, "parametric oscillator")?;
    ensure_param(gamma_a >= 0.0 && gamma_b > 0.0, || {
        format!("displaced frame needs γ_a ≥ 0 and γ_b > 0 (γ_a = {gamma_a}, γ_b = {gamma_b})")
    })?;
    let beta0 = e0 / gamma_b;
    let a = annihilation(space, 0)?;
    let b = annihilation(space, 1)?;
    let shifted = b.axpy(c(beta0, 0.0), &FieldOperator::identity(space))?;
    let k = shifted.mul(&a.adjoint().pow(2)?)?.scale(c(0.0, kappa / 2.0));
    let mut m = ModelSpec::new("dpo_displaced", space, hermitian_part(&k)?, Frame::Interaction);
    m.dissipators.push(Dissipator { op: a, rate: gamma_a });
    m.dissipators.push(Dissipator { op: b, rate: gamma_b });
    m.checked()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::make_space;

    #[test]
    fn two_mode_chi2_elements_and_charge() {
        let s = make_space(&[6, 4]).unwrap();
        let m = h_two_mode_chi2(&s, 1.0, 0.3).unwrap();
        let el = m.hamiltonian.element(&[2, 0], &[0, 1]).unwrap();
        assert!((el - c(0.3 * 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(m.charge_defect(m.charge("M").unwrap()).unwrap() < 1e-10);
        let free = h_two_mode_chi2(&s, 1.0, 0.0).unwrap();
        assert!(free.hamiltonian.is_diagonal());
    }

    #[test]
    fn three_mode_elements_and_charges() {
        let s = make_space(&[3, 3, 3]).unwrap();
        let m = h_three_mode_chi2(&s, 1.0, 1.5, 0.2).unwrap();
        let el = m.hamiltonian.element(&[0, 1, 1], &[1, 0, 0]).unwrap();
        assert!((el - c(0.2, 0.0)).norm() < 1e-15);
        for q in ["M1", "M2"] {
            assert!(m.charge_defect(m.charge(q).unwrap()).unwrap() < 1e-10);
        }
        assert!(h_three_mode_chi2(&s, 1.0, 1.5, 0.0).unwrap().hamiltonian.is_diagonal());
    }

    #[test]
    fn kerr_spectra() {
        let s = make_space(&[7]).unwrap();
        let m = h_kerr_single(&s, 1.3, 0.4).unwrap();
        for n in 0..7 {
            let nf = n as f64;
            assert!((m.hamiltonian.get(n, n).re - (nf * 1.3 + nf * (nf - 1.0) * 0.2)).abs() < 1e-14);
        }
        let s = make_space(&[4, 5]).unwrap();
        let m = h_kerr_cross(&s, 1.0, 2.0, 0.6).unwrap();
        let e = m.hamiltonian.element(&[3, 2], &[3, 2]).unwrap().re;
        assert!((e - (3.0 + 4.0 + 0.3 * 6.0)).abs() < 1e-14);
        // (a†)²a² built from ladder operators agrees with the diagonal form
        let s = make_space(&[7]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let ladder = a.adjoint().pow(2).unwrap().mul(&a.pow(2).unwrap()).unwrap();
        let direct = h_kerr_single(&s, 0.0, 2.0).unwrap().hamiltonian;
        assert!(ladder.max_abs_diff(&direct).unwrap() < 1e-13);
    }

    #[test]
    fn nphoton_matches_chi2_at_two() {
        let s = make_space(&[7, 4]).unwrap();
        let h2 = h_nphoton(&s, 0.7, 0.2, 2).unwrap();
        let chi = h_two_mode_chi2(&s, 0.7, 0.2).unwrap();
        assert_eq!(h2.hamiltonian.max_abs_diff(&chi.hamiltonian).unwrap(), 0.0);
        let h3 = h_nphoton(&s, 0.7, 0.2, 3).unwrap();
        let el = h3.hamiltonian.element(&[3, 0], &[0, 1]).unwrap();
        assert!((el - c(0.2 * 6f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(h3.charge_defect(h3.charge("M").unwrap()).unwrap() < 1e-10);
        assert!(matches!(
            h_nphoton(&make_space(&[3, 3]).unwrap(), 1.0, 0.1, 3),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn parametric_pump_elements() {
        let s = make_space(&[6]).unwrap();
        let beta = c(3.0, 4.0);
        let phi = 0.4;
        let m = h_parametric_classical_pump(&s, 0.2, beta, phi).unwrap();
        assert_eq!(m.hamiltonian.hermiticity_defect(), 0.0);
        let el = m.hamiltonian.get(2, 0);
        let expected = c(0.0, 1.0) * 0.1 * 5.0 * 2f64.sqrt() * C64::from_polar(1.0, phi);
        assert!((el - expected).norm() < 1e-14);
        // φ_p = 0 coincides with the two-mode interaction with b → √N_p
        let m0 = h_parametric_classical_pump(&s, 0.2, beta, 0.0).unwrap();
        let two = make_space(&[6, 2]).unwrap();
        let full = h_two_mode_chi2_displaced(&two, 0.2, c(5.0, 0.0)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let v = full.hamiltonian.element(&[i, 0], &[j, 0]).unwrap();
                assert!((v - m0.hamiltonian.get(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dpo_structure() {
        let s = make_space(&[4, 4]).unwrap();
        let m = dpo_model(&s, 0.0, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(m.hamiltonian.max_abs(), 0.0);
        let m = dpo_model(&s, 0.5, 0.7, 1.0, 1.0).unwrap();
        assert_eq!(m.hamiltonian.hermiticity_defect(), 0.0);
        let el = m.hamiltonian.element(&[0, 1], &[0, 0]).unwrap();
        assert!((el - c(0.0, 0.7)).norm() < 1e-15);
        assert!(matches!(dpo_model(&s, 0.5, 0.7, -1.0, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn lab_frame_hamiltonian_is_hermitian() {
        let s = make_space(&[6]).unwrap();
        let m = h_parametric_lab(&s, 1.0, 0.1, c(0.5, 0.2)).unwrap();
        for t in [0.0, 0.3, 1.7] {
            assert!(m.hamiltonian_at(t).unwrap().hermiticity_defect() < 1e-15);
        }
    }
}
