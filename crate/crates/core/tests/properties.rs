use std::f64::consts::PI;

use nlo_quanta::classical_media::{chi2_mixing_spectrum, synthesize, two_level_mu, TwoLevelParams, EPSILON0};
use nlo_quanta::closed_form::{
    corrected_var_x2, downconv_kernel, kerr_mean_amplitude, para_variances, phase_averaged_var_x2,
};
use nlo_quanta::diagnostics::{duan_simon_sum, husimi_q, mandel_excess, parity_test, quadrature_squeezing, PhaseGrid, Verdict};
use nlo_quanta::fock::{
    annihilation, beam_splitter, coherent_state, creation, make_space, number_operator, QuantumState,
};
use nlo_quanta::linalg::C64;
use nlo_quanta::oscillator::{below_threshold_squeezing, stability_eigenvalues, steady_branches, Branch, DpoParams};
use proptest::prelude::*;

fn state_from(space: &nlo_quanta::fock::SpaceDescriptor, re: &[f64], im: &[f64]) -> QuantumState {
    let v: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect();
    QuantumState::pure_normalized(space, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_is_identity_below_edge(d in 2usize..30) {
        let s = make_space(&[d]).unwrap();
        let c = annihilation(&s, 0).unwrap().commutator(&creation(&s, 0).unwrap()).unwrap().to_dense();
        for i in 0..d {
            for j in 0..d {
                let expect = if i != j { 0.0 } else if i + 1 < d { 1.0 } else { -((d - 1) as f64) };
                prop_assert!((c[(i, j)] - C64::new(expect, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn coherent_state_is_eigenstate(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let alpha = C64::new(re, im);
        let s = make_space(&[45]).unwrap();
        let st = coherent_state(&s, &[alpha]).unwrap();
        let v = st.vector().unwrap();
        let av = annihilation(&s, 0).unwrap().apply(v.as_slice());
        let defect: f64 = av.iter().zip(v.iter()).map(|(x, y)| (x - alpha * y).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(defect < 1e-6);
    }

    #[test]
    fn variances_nonnegative(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
        prop_assume!(re.iter().chain(&im).map(|x| x * x).sum::<f64>() > 1e-3);
        let s = make_space(&[4, 4]).unwrap();
        let st = state_from(&s, &re, &im);
        for op in [number_operator(&s, 0).unwrap(), nlo_quanta::fock::quadrature(&s, 1, 0.3).unwrap()] {
            prop_assert!(st.variance(&op).unwrap() >= -1e-12);
        }
        let q = husimi_q(&st, 0, &PhaseGrid::new(C64::new(0.0, 0.0), 2.0, 7).unwrap().points()).unwrap();
        prop_assert!(q.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn partial_trace_of_product(a in -1.5f64..1.5, b in -1.5f64..1.5) {
        let s = make_space(&[20, 20]).unwrap();
        let joint = coherent_state(&s, &[C64::new(a, 0.0), C64::new(0.0, b)]).unwrap();
        let single = coherent_state(&make_space(&[20]).unwrap(), &[C64::new(0.0, b)]).unwrap();
        let reduced = joint.partial_trace(&[1]).unwrap();
        prop_assert!(reduced.max_abs_diff(&single.to_density()).unwrap() < 1e-12);
    }

    #[test]
    fn beam_splitter_unitary(t in 0.0f64..=1.0) {
        let s = make_space(&[5, 4]).unwrap();
        let u = beam_splitter(&s, t).unwrap().to_dense();
        let id = nalgebra::DMatrix::<C64>::identity(20, 20);
        prop_assert!((&u * u.adjoint() - id).norm() < 1e-10);
    }

    #[test]
    fn duan_simon_exchange_symmetry(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
        prop_assume!(re.iter().chain(&im).map(|x| x * x).sum::<f64>() > 1e-3);
        let s = make_space(&[4, 4]).unwrap();
        let st = state_from(&s, &re, &im);
        let ab = duan_simon_sum(&st, 0, 1).unwrap().value;
        let ba = duan_simon_sum(&st, 1, 0).unwrap().value;
        prop_assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn coherent_states_are_classical(re in -1.5f64..1.5, im in -1.5f64..1.5, phi in 0.0f64..PI) {
        let s = make_space(&[40, 40]).unwrap();
        let st = coherent_state(&s, &[C64::new(re, im), C64::new(im, -re)]).unwrap();
        prop_assert_eq!(mandel_excess(&st, 0).unwrap().verdict, Verdict::Inconclusive);
        prop_assert_eq!(quadrature_squeezing(&st, 1, phi).unwrap().verdict, Verdict::Inconclusive);
        prop_assert_eq!(duan_simon_sum(&st, 0, 1).unwrap().verdict, Verdict::Inconclusive);
        prop_assert_eq!(parity_test(&st, 0).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn para_uncertainty_product(u in 0.0f64..3.0, phi in 0.0f64..(2.0 * PI)) {
        let (a, b) = para_variances(u, phi);
        prop_assert!(a * b >= 1.0 / 16.0 - 1e-15);
        let (c, d) = para_variances(u, 0.0);
        prop_assert!((c * d - 1.0 / 16.0).abs() < 1e-12 * c.max(1.0));
    }

    #[test]
    fn pump_noise_degrades_squeezing(u in 0.001f64..5.0, np in 1.0f64..1e6) {
        let ideal = para_variances(u, 0.0).1;
        let averaged = phase_averaged_var_x2(u, np).unwrap();
        prop_assert!(averaged >= ideal);
        prop_assert!(corrected_var_x2(u, np).unwrap() <= averaged);
    }

    #[test]
    fn kerr_mean_periodic(re in -2.0f64..2.0, t in 0.0f64..7.0, omega in -2.0f64..2.0) {
        let alpha = C64::new(re, 0.5);
        let kappa = 1.3;
        let shifted = kerr_mean_amplitude(alpha, omega, kappa, t + 2.0 * PI / kappa);
        let expect = kerr_mean_amplitude(alpha, omega, kappa, t) * C64::from_polar(1.0, -omega * 2.0 * PI / kappa);
        prop_assert!((shifted - expect).norm() < 1e-9);
    }

    #[test]
    fn kernel_exchange_branches_agree(z in -50.0f64..50.0, k0 in 0.1f64..5.0) {
        let p = downconv_kernel(z, k0).unwrap();
        prop_assert!((p.value - p.exchanged).norm() <= 1e-10 * p.value.norm().max(1e-3));
    }

    #[test]
    fn two_level_vieta(delta in -1e10f64..1e10, ge in 0.0f64..1e10) {
        let p = TwoLevelParams { delta, g_e: ge, n_density: 1.0, g: 1.0 };
        let (mp, mm) = two_level_mu(&p);
        let scale = delta.abs().max(ge).max(1.0);
        prop_assert!((mp + mm + delta).abs() <= 1e-14 * scale * 4.0);
        prop_assert!((mp * mm + ge * ge).abs() <= 1e-14 * scale * scale * 4.0);
    }

    #[test]
    fn mixing_reconstructs_square(w1 in 0.1f64..5.0, w2 in 0.1f64..5.0, e1 in -2.0f64..2.0, e2 in -2.0f64..2.0, t in 0.0f64..10.0) {
        let chi2 = 0.7;
        let tones = chi2_mixing_spectrum(&[(w1, e1), (w2, e2)], chi2);
        let e = e1 * (w1 * t).cos() + e2 * (w2 * t).cos();
        let direct = EPSILON0 * chi2 * e * e;
        prop_assert!((synthesize(&tones, t) - direct).abs() < 1e-12 * EPSILON0 * 16.0);
    }

    #[test]
    fn oscillator_branches(ratio in 0.02f64..3.0, ga in 0.3f64..2.0, gb in 0.3f64..2.0) {
        prop_assume!((ratio - 1.0).abs() > 1e-3);
        let kappa = 0.8;
        let p = DpoParams::new(kappa, ratio * ga * gb / kappa, ga, gb).unwrap();
        for b in steady_branches(&p).unwrap() {
            prop_assert!(b.residual(&p) < 1e-12 * (1.0 + p.e0));
            let st = stability_eigenvalues(&p, &b).unwrap();
            prop_assert!(st.polynomial_residual < 1e-9 * (1.0 + p.e0).powi(4));
            let expect_stable = (b.branch == Branch::Below) == (ratio < 1.0);
            prop_assert_eq!(st.stable, expect_stable);
        }
        if ratio < 1.0 {
            let sq = below_threshold_squeezing(&p).unwrap();
            prop_assert!(sq > 1.0 / 8.0 && sq <= 0.25);
            let q = DpoParams::new(kappa, p.e0 * 1.01, ga, gb).unwrap();
            if q.threshold_ratio() < 1.0 {
                prop_assert!(below_threshold_squeezing(&q).unwrap() < sq);
            }
        }
    }
}
