use std::f64::consts::PI;

use strip_spectrum::threshold::{edge_identity, threshold_indicator};
use strip_spectrum::{
    critical_lengths, discrete_spectrum, emergence_prediction, mu_coefficient, threshold_solution, Geometry, ModeBasis,
    Parity,
};

#[test]
fn critical_lengths_are_increasing_from_zero() {
    for d in [PI, PI / 2.0] {
        let c = critical_lengths(d, 4, 60, 1e-10).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], 0.0);
        assert!(c.windows(2).all(|w| w[1] > w[0]));
        // Each new eigenvalue appears within the counting bounds.
        let g = Geometry::new(d, 1.0).unwrap();
        for (n, &ln) in c.iter().enumerate().skip(1) {
            let lower = n as f64 * PI / (2.0 * g.counting_rate());
            let upper = (n as f64 + 1.0) * PI / (2.0 * g.counting_rate());
            assert!(ln >= lower && ln <= upper, "l_{} = {ln} outside [{lower}, {upper}]", n + 1);
        }
    }
}

#[test]
fn count_jumps_across_critical_lengths() {
    let c = critical_lengths(PI, 3, 60, 1e-10).unwrap();
    for n in 2..=3 {
        let below = discrete_spectrum(&Geometry::new(PI, c[n - 1] - 1e-2).unwrap(), 60, 1e-10).unwrap();
        let above = discrete_spectrum(&Geometry::new(PI, c[n - 1] + 1e-2).unwrap(), 60, 1e-10).unwrap();
        assert_eq!(below.points.len(), n - 1);
        assert_eq!(above.points.len(), n);
    }
}

#[test]
fn threshold_indicator_changes_sign_at_l2() {
    let c = critical_lengths(PI / 2.0, 2, 60, 1e-12).unwrap();
    let g = Geometry::new(PI / 2.0, 1.0).unwrap();
    let basis = ModeBasis::new(&g, 60).unwrap();
    let a = threshold_indicator(&basis, c[1] - 1e-3, Parity::Odd).unwrap();
    let b = threshold_indicator(&basis, c[1] + 1e-3, Parity::Odd).unwrap();
    assert!(a.sign * b.sign < 0.0);
}

#[test]
fn threshold_solution_far_field() {
    for d in [PI, PI / 2.0] {
        let c = critical_lengths(d, 2, 60, 1e-12).unwrap();
        let ts = threshold_solution(d, 2, c[1], 60).unwrap();
        assert_eq!(ts.parity, Parity::Odd);
        assert!((ts.zero_mode_coeff - (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!(ts.sigma_min < 1e-8 && ts.sigma_second > 1e-3);
        let target = (2.0 / PI).sqrt();
        let phi = ts.field.value(8.0, PI / 2.0).unwrap();
        let envelope = (-(3f64.sqrt()) * (8.0 - c[1])).exp();
        assert!((phi - target).abs() < envelope, "d = {d}: {phi} vs {target}");
        assert!(ts.mu > 0.0 && (ts.mu - mu_coefficient(&ts)).abs() < 1e-15);
        assert!(ts.alpha.is_finite() && ts.alpha != 0.0);
    }
}

#[test]
fn emergence_prediction_domain() {
    let c = critical_lengths(PI / 2.0, 2, 60, 1e-12).unwrap();
    let ts = threshold_solution(PI / 2.0, 2, c[1], 60).unwrap();
    assert_eq!(emergence_prediction(&ts, c[1]).unwrap(), 1.0);
    assert!(emergence_prediction(&ts, c[1] - 0.1).is_err());
    let p = emergence_prediction(&ts, c[1] + 0.05).unwrap();
    assert!(p < 1.0 && p > 0.99);
}

#[test]
fn emergence_matches_solver() {
    let c = critical_lengths(PI / 2.0, 2, 60, 1e-12).unwrap();
    let ts = threshold_solution(PI / 2.0, 2, c[1], 60).unwrap();
    let l = c[1] + 0.0125;
    let s = discrete_spectrum(&Geometry::new(PI / 2.0, l).unwrap(), 60, 1e-13).unwrap();
    let lam = s.points[1].lambda;
    let pred = emergence_prediction(&ts, l).unwrap();
    assert!(((1.0 - lam) - (1.0 - pred)).abs() < 0.05 * (1.0 - pred));
}

#[test]
fn edge_coefficient_identity() {
    let id = edge_identity(PI / 2.0, 2, 60, 1e-11).unwrap();
    let rel = (id.alpha_prediction - id.energy_extrapolated).abs() / id.energy_extrapolated;
    assert!(rel < 0.05, "{id:?}");
    assert!((id.exponent_extrapolated - 0.5).abs() < 0.05, "{id:?}");
}

#[test]
fn symmetric_widths_halve_mu() {
    let c = critical_lengths(PI, 2, 60, 1e-12).unwrap();
    let ts = threshold_solution(PI, 2, c[1], 60).unwrap();
    let full = ts.field.dx1_energy() / ts.l_n;
    assert!((ts.mu - 0.5 * full).abs() < 1e-14);
}
