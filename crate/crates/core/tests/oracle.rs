use std::f64::consts::PI;

use strip_spectrum::oracle::{build_grid, oracle_extrapolated, oracle_lowest, oracle_spectrum, suggested_truncation};
use strip_spectrum::{discrete_spectrum, Geometry, Parity};

#[test]
fn closed_window_gives_the_strip_threshold() {
    let g = Geometry::new(PI, 0.0).unwrap();
    let errs: Vec<f64> = [PI / 8.0, PI / 16.0]
        .iter()
        .map(|&h| {
            let grid = build_grid(&g, 6.0, h).unwrap();
            assert_eq!(grid.open_window_nodes(), 0);
            let exact = 1.0 + PI * PI / (4.0 * grid.r * grid.r);
            (oracle_lowest(&grid, Parity::Even, 1).unwrap()[0] - exact).abs()
        })
        .collect();
    assert!(errs[1] < errs[0] / 3.5, "{errs:?}");
    assert!(errs[1] < 1e-2);
}

#[test]
fn open_window_node_count() {
    let g = Geometry::new(PI, 2.0).unwrap();
    let grid = build_grid(&g, 12.0, PI / 64.0).unwrap();
    assert_eq!(grid.open_window_nodes(), (4.0 / grid.h1).ceil() as usize - 1);
    assert!((grid.r - 12.0).abs() <= grid.h1);
}

#[test]
fn coarse_oracle_brackets_the_solver() {
    let g = Geometry::new(PI / 2.0, 3.0).unwrap();
    let mm = discrete_spectrum(&g, 60, 1e-10).unwrap();
    let k = (1.0 - mm.points.last().unwrap().lambda).sqrt();
    let est = oracle_extrapolated(&g, suggested_truncation(3.0, k), PI / 8.0, 2).unwrap();
    assert_eq!(est.mixed.len(), 2);
    assert_eq!(est.parity, vec![Parity::Even, Parity::Odd]);
    for (p, o) in mm.points.iter().zip(&est.mixed) {
        assert!((p.lambda - o).abs() / o < 1e-2, "{} vs {o}", p.lambda);
    }
    for level in &est.levels {
        assert!(level.eigenvalues.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }
}

#[test]
fn truncation_length_does_not_matter() {
    let g = Geometry::new(PI / 2.0, 3.0).unwrap();
    let h = PI / 8.0;
    let a = oracle_spectrum(&build_grid(&g, 20.0, h).unwrap(), 1).unwrap();
    let b = oracle_spectrum(&build_grid(&g, 24.0, h).unwrap(), 1).unwrap();
    assert!((a[0].lambda - b[0].lambda).abs() < 1e-6, "{a:?} {b:?}");
}

#[test]
fn eigenvalues_stay_below_the_discrete_threshold() {
    let g = Geometry::new(PI, 2.0).unwrap();
    let grid = build_grid(&g, 14.0, PI / 8.0).unwrap();
    let s = oracle_spectrum(&grid, 4).unwrap();
    assert_eq!(s.len(), 1);
    assert!(s[0].lambda < grid.discrete_threshold());
    assert!(s[0].residual < 1e-8);
}
