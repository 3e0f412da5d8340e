use nlo_quanta::diagnostics::{number_diff_criterion, parity_test, rotation_invariance, Verdict};
use nlo_quanta::evolve::{evolve_pure, evolve_pure_with, EvolveOptions};
use nlo_quanta::fock::{coherent_state, fock_state, make_space, number_operator, parity, QuantumState};
use nlo_quanta::linalg::C64;
use nlo_quanta::models::{h_three_mode_chi2, h_two_mode_chi2};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn energy_and_charge_conserved() {
    let s = make_space(&[40, 20]).unwrap();
    let m = h_two_mode_chi2(&s, 1.0, 0.4).unwrap();
    let psi0 = coherent_state(&s, &[c(0.0), c(1.5)]).unwrap();
    let h = m.hamiltonian_at(0.0).unwrap();
    let times: Vec<f64> = (0..20).map(|i| 0.3 * i as f64).collect();
    let opts = EvolveOptions { keep_states: false, ..EvolveOptions::default() }
        .observe("H", h)
        .observe("M", m.charge("M").unwrap().clone());
    let ev = evolve_pure_with(&m, &psi0, &times, &opts).unwrap();
    for key in ["H", "M"] {
        let v = ev.observable(key).unwrap();
        let drift = v.iter().map(|x| (x - v[0]).norm()).fold(0.0, f64::max);
        assert!(drift < 1e-9, "{key} drift {drift:e}");
    }
}

#[test]
fn signal_parity_preserved() {
    let s = make_space(&[30, 15]).unwrap();
    let m = h_two_mode_chi2(&s, 0.0, 0.5).unwrap();
    let psi0 = coherent_state(&s, &[c(0.0), c(1.2)]).unwrap();
    let ev = evolve_pure(&m, &psi0, &[0.5, 1.5, 3.0]).unwrap();
    let sig = make_space(&[30]).unwrap();
    let p = parity(&sig, 0).unwrap().to_dense();
    for st in &ev.states {
        assert!(parity_test(st, 0).unwrap().components["q_odd"] < 1e-10);
        let rho = st.partial_trace(&[0]).unwrap().density_matrix();
        assert!((&p * &rho - &rho * &p).norm() < 1e-10);
    }
}

#[test]
fn rotation_covariance() {
    let s = make_space(&[24, 16]).unwrap();
    let m = h_two_mode_chi2(&s, 0.0, 0.5).unwrap();
    // n = 1: any pump; the signal is invariant under a rotation by π
    let coh = coherent_state(&s, &[c(0.0), c(1.0)]).unwrap();
    let st = evolve_pure(&m, &coh, &[1.0]).unwrap().final_state.unwrap();
    assert!(rotation_invariance(&st.partial_trace(&[0]).unwrap(), 0, 1).unwrap() < 1e-9);
    // n = 2: pump built from even photon numbers, signal invariant under π/2
    let mut v = vec![c(0.0); s.total_dim()];
    v[s.flat_index(&[0, 0]).unwrap()] = c(1.0);
    v[s.flat_index(&[0, 2]).unwrap()] = c(0.8);
    v[s.flat_index(&[0, 4]).unwrap()] = c(0.3);
    let even = QuantumState::pure_normalized(&s, v).unwrap();
    let st = evolve_pure(&m, &even, &[0.7, 1.4]).unwrap();
    for t in &st.states {
        let sig = t.partial_trace(&[0]).unwrap();
        assert!(rotation_invariance(&sig, 0, 2).unwrap() < 1e-9);
    }
    // an odd pump component breaks the n = 2 symmetry
    let broken = coherent_state(&s, &[c(0.0), c(1.0)]).unwrap();
    let sig = evolve_pure(&m, &broken, &[1.4]).unwrap().final_state.unwrap().partial_trace(&[0]).unwrap();
    assert!(rotation_invariance(&sig, 0, 2).unwrap() > 1e-4);
}

#[test]
fn three_mode_twin_beams() {
    // (pump, signal, idler)
    let s = make_space(&[6, 8, 8]).unwrap();
    let m = h_three_mode_chi2(&s, 1.0, 1.0, 0.6).unwrap();
    let psi0 = fock_state(&s, &[3, 0, 0]).unwrap();
    let ev = evolve_pure(&m, &psi0, &[0.2, 0.6, 1.0]).unwrap();
    let n1 = number_operator(&s, 1).unwrap();
    for st in &ev.states {
        let r = number_diff_criterion(st, 1, 2).unwrap();
        assert!(r.components["var_diff"].abs() < 1e-10);
        assert!(st.expectation(&n1).unwrap().re > 1e-3);
        assert_eq!(r.verdict, Verdict::Nonclassical);
        for q in &m.charges {
            let d = (st.expectation(&q.op).unwrap() - psi0.expectation(&q.op).unwrap()).norm();
            assert!(d < 1e-10, "{} drift {d:e}", q.name);
        }
    }
}
