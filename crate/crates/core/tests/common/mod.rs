#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Composite Gauss-Legendre rule: `panels` equal panels of `degree` nodes.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, degree: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(degree).unwrap());
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}

/// Full-strip mode `i` written from scratch.
pub fn full_mode(d: f64, i: usize, x2: f64) -> f64 {
    (2.0 / (PI + d)).sqrt() * (i as f64 * PI * (x2 - PI) / (PI + d)).sin()
}

pub fn upper_mode(j: usize, x2: f64) -> f64 {
    (2.0 / PI).sqrt() * (j as f64 * x2).sin()
}

pub fn lower_mode(d: f64, j: usize, x2: f64) -> f64 {
    (2.0 / d).sqrt() * (j as f64 * PI * x2 / d).sin()
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
