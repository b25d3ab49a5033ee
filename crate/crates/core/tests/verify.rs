use std::f64::consts::PI;

use strip_spectrum::verify::{
    check_accumulation, check_brackets, check_counting, check_decay, check_parity, check_trajectories,
    check_wide_window, emergence_run, VerifyConfig,
};
use strip_spectrum::{eigenfunction, lambda_bound, solve_in_bracket, sweep_over_l, Geometry, SweepTable};

fn table(d: f64) -> SweepTable {
    sweep_over_l(d, &[0.5, 1.0, 2.0, 4.0, 6.0], 40, 1e-10).unwrap()
}

#[test]
fn brackets_pass_and_catch_injected_violation() {
    let mut t = table(PI);
    assert!(check_brackets(&t).passed);
    let g = Geometry::new(PI, t.l_values[3]).unwrap();
    t.rows[3][0].lambda = lambda_bound(&g, 1).unwrap();
    let r = check_brackets(&t);
    assert!(!r.passed);
    assert_eq!(r.measured[0], 1.0);
}

#[test]
fn empty_table_passes_vacuously() {
    let t = SweepTable {
        d: PI,
        l_values: vec![],
        rows: vec![],
        counts: vec![],
        warnings: vec![],
    };
    let r = check_brackets(&t);
    assert!(r.passed);
    assert!(r.details.contains("warning"));
}

#[test]
fn counting_catches_missing_eigenvalue() {
    let mut t = table(PI / 2.0);
    assert!(check_counting(&t).passed);
    let last = t.counts.len() - 1;
    t.counts[last] = t.counts[last - 1] - 1;
    assert!(!check_counting(&t).passed);
}

#[test]
fn trajectories_catch_a_jump() {
    let grid: Vec<f64> = (0..20).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut t = sweep_over_l(PI, &grid, 40, 1e-10).unwrap();
    assert!(check_trajectories(&t, 10.0).passed);
    t.rows[10][0].lambda -= 0.05;
    assert!(!check_trajectories(&t, 10.0).passed);
}

#[test]
fn wide_window_slope() {
    let r = check_wide_window(PI, 1, &[8.0, 12.0, 16.0, 24.0, 32.0], 60).unwrap();
    assert!(r.passed, "{}", r.details);
    assert!((r.measured[0] + 3.0).abs() < 0.5);
    assert!(r.measured[2] < r.measured[1]);
}

#[test]
fn accumulation_edge_cases() {
    assert!(check_accumulation(PI, 1.0, &[4.0], 40).is_err());
    assert!(check_accumulation(PI, 0.2, &[4.0], 40).is_err());
    let r = check_accumulation(PI, 0.25, &[4.0, 8.0, 16.0], 40).unwrap();
    assert!(r.details.matches("m = 1").count() == 3);
    assert!(r.passed, "{}", r.details);
}

#[test]
fn decay_and_parity() {
    let g = Geometry::new(PI, 2.0).unwrap();
    let p = solve_in_bracket(&g, 1, 60, 1e-12).unwrap();
    let ef = eigenfunction(&g, &p, 60).unwrap();
    let r = check_decay(&ef, &g).unwrap();
    assert!(r.passed, "{}", r.details);
    assert!(check_parity(&ef, &g).unwrap().passed);

    let g = Geometry::new(PI / 2.0, 4.0).unwrap();
    let p = solve_in_bracket(&g, 1, 60, 1e-12).unwrap();
    let ef = eigenfunction(&g, &p, 60).unwrap();
    let r = check_decay(&ef, &g).unwrap();
    assert!(r.passed, "{}", r.details);
    assert!(r.measured[1] < r.measured[0]);
}

#[test]
fn reports_are_deterministic() {
    let cfg = VerifyConfig {
        n_modes: 40,
        ..VerifyConfig::default()
    };
    let a = emergence_run(PI / 2.0, 2, &cfg.emergence_ladder, &cfg).unwrap();
    let b = emergence_run(PI / 2.0, 2, &cfg.emergence_ladder, &cfg).unwrap();
    assert_eq!(a, b);
    let t = table(PI);
    assert_eq!(check_brackets(&t), check_brackets(&table(PI)));
}
