//! Acceptance criteria 1–12. Each test prints its outcome line; tolerances
//! and runtime budgets are pinned here independently of the check bodies.

use std::process::Command;

use nlo_quanta::validation::{run_criterion, CheckOutcome};

fn check(id: u8, budget_s: f64, limits: &[(&str, f64)]) -> CheckOutcome {
    let o = run_criterion(id);
    println!("{}", o.summary());
    assert!(o.passed, "{}", o.summary());
    for (key, limit) in limits {
        let v = o.metrics.get(*key).unwrap_or_else(|| panic!("criterion {id} missing metric {key}"));
        assert!(v.abs() < *limit, "criterion {id}: {key} = {v:e}, limit {limit:e}");
    }
    assert!(o.seconds < budget_s, "criterion {id} took {:.1} s, budget {budget_s} s", o.seconds);
    o
}

#[test]
fn criterion_01_squeezed_vacuum() {
    check(1, 30.0, &[("max_rel_err_var_x1", 0.02), ("max_rel_err_var_x2", 0.02)]);
}

#[test]
fn criterion_02_max_squeezing_scaling() {
    check(
        2,
        1.0,
        &[
            ("scaled_min_defect_1e2", 1e-10),
            ("scaled_min_defect_1e4", 1e-10),
            ("scaled_min_defect_1e6", 1e-10),
            ("u_star_defect_1e2", 1e-10),
            ("u_star_defect_1e4", 1e-10),
            ("u_star_defect_1e6", 1e-10),
        ],
    );
}

#[test]
fn criterion_03_conservation_and_parity() {
    check(3, 20.0, &[("max_charge_drift", 1e-10), ("max_odd_population", 1e-10)]);
}

#[test]
fn criterion_04_entanglement_minimum() {
    let o = check(4, 1.0, &[("value_defect", 1e-9), ("c0_defect", 1e-9)]);
    assert!((o.metrics["minimum"] - 1.17157).abs() < 1e-5);
}

#[test]
fn criterion_05_kerr_exact_mean() {
    check(5, 10.0, &[("max_abs_error", 1e-10), ("revival_error", 1e-10)]);
}

#[test]
fn criterion_06_kerr_beam_splitter() {
    let o = check(6, 120.0, &[("relative_difference", 0.2)]);
    assert!(o.metrics["simulated_excess"] < 0.0 && o.metrics["closed_form_excess"] < 0.0);
}

#[test]
fn criterion_07_oscillator_below_threshold() {
    check(
        7,
        120.0,
        &[
            ("below_eigenvalue_error", 1e-9),
            ("above_eigenvalue_error", 1e-9),
            ("number_rel_err", 0.05),
            ("var_x2_rel_err", 0.05),
        ],
    );
}

#[test]
fn criterion_08_two_level_susceptibilities() {
    let o = check(8, 1.0, &[]);
    assert!((o.metrics["slope"] - 5.0).abs() < 0.3);
}

#[test]
fn criterion_09_dispersion_consistency() {
    check(
        9,
        1.0,
        &[
            ("max_root_residual", 1e-12),
            ("max_mode_norm_disagreement", 1e-10),
            ("max_group_velocity_fd_error", 1e-6),
        ],
    );
}

#[test]
fn criterion_10_soliton_propagation() {
    check(10, 60.0, &[("shape_deviation", 1e-3), ("norm_drift", 1e-10)]);
}

#[test]
fn criterion_11_downconversion_kernel() {
    let o = check(11, 60.0, &[("zero_limit_rel_err", 1e-8)]);
    assert!((o.metrics["decay_exponent"] - 2.0).abs() < 0.1);
}

#[test]
fn criterion_12_validate_command() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_nlo-quanta"))
        .args(["validate", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("validation_report.json")).unwrap()).unwrap();
    let outcomes = report["outcomes"].as_array().unwrap();
    for id in 1..=11 {
        let o = outcomes
            .iter()
            .find(|o| o["id"] == format!("criterion_{id}"))
            .unwrap_or_else(|| panic!("criterion {id} missing from the matrix"));
        assert_eq!(o["passed"], true, "criterion {id}: {}", o["detail"]);
    }
    assert_eq!(report["all_passed"], true);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), outcomes.len());
    println!("[PASS] criterion_12 validate matrix ({} checks) {elapsed:.2} s", outcomes.len());
    assert!(elapsed < 600.0, "validate took {elapsed:.0} s");
}
