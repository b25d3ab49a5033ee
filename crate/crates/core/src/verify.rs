//! Pass/fail checks of the bracket inequalities, the counting bound and the
//! asymptotic laws against computed spectra.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::{bracket_for, count_bounds, lambda_bound, Geometry};
use crate::linalg::{least_squares, line_fit};
use crate::matching::{eigenfunction_with_basis, EigenfunctionExpansion, FieldExpansion, ModeBasis, Parity, SolveOptions, NULL_RESIDUAL_LIMIT};
use crate::matching::solve_with_basis;
use crate::oracle::{build_grid, oracle_extrapolated, suggested_truncation, OracleEstimate};
use crate::spectrum::{discrete_spectrum_with, extrapolated_spectrum, sweep_over_l, ExtrapolatedPoint, SweepTable};
use crate::threshold::{critical_lengths_with, edge_identity, threshold_solution_with, CriticalOptions, ThresholdOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub passed: bool,
    pub measured: Vec<f64>,
    pub expected: Vec<f64>,
    pub tolerance: f64,
    pub details: String,
}

impl CheckReport {
    fn new(name: &str, passed: bool, measured: Vec<f64>, expected: Vec<f64>, tolerance: f64, details: String) -> Self {
        Self {
            check_name: name.to_string(),
            passed,
            measured,
            expected,
            tolerance,
            details,
        }
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        format!(
            "[{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.check_name,
            self.details
        )
    }
}

/// Tolerances and knobs of every check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n_modes: usize,
    pub tol: f64,
    pub wide_window_slope_max: f64,
    pub emergence_ladder: Vec<f64>,
    pub emergence_exponent_tol: f64,
    pub emergence_coeff_rel: f64,
    pub mu_alpha_rel: f64,
    pub edge_exponent_tol: f64,
    pub decay_upper_rel: f64,
    pub decay_lower_rel: f64,
    pub convergence_exponent_min: f64,
    pub convergence_box: f64,
    pub convergence_spacing: f64,
    pub trajectory_jump_factor: f64,
    pub count_delta: f64,
    pub oracle_rel: f64,
    pub oracle_rel_target: f64,
    /// Upper bound on unknowns of the finest oracle mesh.
    pub oracle_budget: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_modes: 60,
            tol: 1e-10,
            wide_window_slope_max: -2.5,
            emergence_ladder: vec![0.1, 0.05, 0.025, 0.0125],
            emergence_exponent_tol: 0.1,
            emergence_coeff_rel: 0.10,
            mu_alpha_rel: 0.05,
            edge_exponent_tol: 0.05,
            decay_upper_rel: 0.01,
            decay_lower_rel: 0.02,
            convergence_exponent_min: 0.4,
            convergence_box: 5.0,
            convergence_spacing: 0.05,
            trajectory_jump_factor: 10.0,
            count_delta: 1e-2,
            oracle_rel: 1e-3,
            oracle_rel_target: 1e-4,
            oracle_budget: 400_000,
        }
    }
}

impl VerifyConfig {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions::with_tol(self.tol)
    }
}

/// Strict containment `Lambda_{m-1} < lambda_m < Lambda_m` for every cell.
pub fn check_brackets(table: &SweepTable) -> CheckReport {
    let mut violations = 0usize;
    let mut min_margin = f64::INFINITY;
    let mut cells = 0usize;
    let mut worst = String::new();
    for (&l, row) in table.l_values.iter().zip(&table.rows) {
        for p in row {
            cells += 1;
            let g = match Geometry::new(table.d, l) {
                Ok(g) => g,
                Err(_) => {
                    violations += 1;
                    continue;
                }
            };
            let (lo, hi) = match (lambda_bound(&g, p.m - 1), lambda_bound(&g, p.m)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => {
                    violations += 1;
                    continue;
                }
            };
            let margin = (p.lambda - lo).min(hi - p.lambda) / (hi - lo);
            if margin < min_margin {
                min_margin = margin;
            }
            if !(lo < p.lambda && p.lambda < hi) {
                violations += 1;
                worst = format!(" first violation at l = {l}, m = {}, lambda = {}", p.m, p.lambda);
            }
        }
    }
    if cells == 0 {
        return CheckReport::new(
            "brackets",
            true,
            vec![],
            vec![],
            0.0,
            "empty table: passes vacuously (warning: nothing checked)".into(),
        );
    }
    CheckReport::new(
        "brackets",
        violations == 0,
        vec![violations as f64, min_margin],
        vec![0.0, 0.0],
        0.0,
        format!(
            "{cells} eigenvalues, {violations} outside their brackets; smallest relative margin {min_margin:.3e}.{worst}"
        ),
    )
}

/// Count within `[floor(2l sqrt(1-kappa^2)/pi), floor + 1]` and non-decreasing in `l`.
pub fn check_counting(table: &SweepTable) -> CheckReport {
    let mut violations = Vec::new();
    let mut lower = Vec::new();
    for (i, (&l, &count)) in table.l_values.iter().zip(&table.counts).enumerate() {
        let bounds = Geometry::new(table.d, l).and_then(|g| count_bounds(&g));
        match bounds {
            Ok((lo, hi)) => {
                lower.push(lo as f64);
                if count < lo || count > hi {
                    violations.push(format!("l = {l}: {count} not in [{lo}, {hi}]"));
                }
            }
            Err(e) => {
                lower.push(f64::NAN);
                violations.push(format!("l = {l}: {e}"));
            }
        }
        if i > 0 && count < table.counts[i - 1] {
            violations.push(format!("count drops from {} to {count} at l = {l}", table.counts[i - 1]));
        }
    }
    let measured = table.counts.iter().map(|&c| c as f64).collect();
    if table.l_values.is_empty() {
        return CheckReport::new("counting", true, measured, lower, 0.0, "empty table: passes vacuously".into());
    }
    let details = if violations.is_empty() {
        format!("counts {:?} within bounds and non-decreasing", table.counts)
    } else {
        violations.join("; ")
    };
    CheckReport::new("counting", violations.is_empty(), measured, lower, 0.0, details)
}

/// Each `lambda_m(l)` non-increasing, and no step larger than `factor` times
/// the neighbouring secant slopes predict.
pub fn check_trajectories(table: &SweepTable, factor: f64) -> CheckReport {
    let mut increases = 0usize;
    let mut jumps = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let mut notes = Vec::new();
    for m in 1..=table.max_index() {
        let t = table.trajectory(m);
        if t.len() < 2 {
            continue;
        }
        let slopes: Vec<f64> = t.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        for (i, w) in t.windows(2).enumerate() {
            let dl = w[1].0 - w[0].0;
            let step = w[1].1 - w[0].1;
            if step > 1e-9 {
                increases += 1;
                notes.push(format!("m = {m} increases by {step:.2e} at l = {}", w[1].0));
            }
            let mut neighbours = Vec::new();
            if i > 0 {
                neighbours.push(slopes[i - 1].abs());
            }
            if i + 1 < slopes.len() {
                neighbours.push(slopes[i + 1].abs());
            }
            if neighbours.is_empty() {
                continue;
            }
            let expected = neighbours.iter().sum::<f64>() / neighbours.len() as f64 * dl;
            let ratio = step.abs() / expected.max(1e-12);
            worst_ratio = worst_ratio.max(ratio);
            if step.abs() > factor * expected + 1e-9 {
                jumps += 1;
                notes.push(format!("m = {m} jumps by {step:.2e} at l = {}", w[1].0));
            }
        }
    }
    let passed = increases == 0 && jumps == 0;
    let details = if passed {
        format!(
            "{} trajectories non-increasing; largest step / neighbouring-secant estimate = {worst_ratio:.2}",
            table.max_index()
        )
    } else {
        notes.join("; ")
    };
    CheckReport::new(
        "trajectories",
        passed,
        vec![increases as f64, jumps as f64, worst_ratio],
        vec![0.0, 0.0, factor],
        factor,
        details,
    )
}

pub fn check_wide_window(d: f64, m: usize, l_list: &[f64], n_modes: usize) -> Result<CheckReport> {
    check_wide_window_with(
        d,
        m,
        l_list,
        &VerifyConfig {
            n_modes,
            ..VerifyConfig::default()
        },
    )
}

/// Fits `log |lambda_m - Lambda_m|` against `log l`.
pub fn check_wide_window_with(d: f64, m: usize, l_list: &[f64], cfg: &VerifyConfig) -> Result<CheckReport> {
    if l_list.len() < 2 || l_list.windows(2).any(|w| w[1] <= w[0]) {
        return domain("wide-window check needs an increasing list of at least two lengths");
    }
    let g0 = Geometry::new(d, l_list[0])?;
    let basis = ModeBasis::new(&g0, cfg.n_modes)?;
    let mut residual = Vec::new();
    let mut lambdas = Vec::new();
    for &l in l_list {
        let p = solve_with_basis(&basis, l, m, &cfg.solve_options())?;
        let upper = lambda_bound(&g0.with_window(l)?, m)?;
        residual.push(upper - p.lambda);
        lambdas.push(p.lambda);
    }
    let name = format!("wide_window(d={d:.6}, m={m})");
    if residual.iter().any(|&r| r < 10.0 * cfg.tol) {
        return Ok(CheckReport::new(
            &name,
            true,
            residual,
            vec![],
            cfg.wide_window_slope_max,
            "inconclusive: remainder below solver tolerance".into(),
        ));
    }
    let lx: Vec<f64> = l_list.iter().map(|l| l.ln()).collect();
    let ly: Vec<f64> = residual.iter().map(|r| r.ln()).collect();
    let (slope, _) = line_fit(&lx, &ly)?;
    let decreasing = residual.windows(2).all(|w| w[1] < w[0]);
    let limit_gap = lambdas.last().copied().unwrap_or(f64::NAN) - g0.kappa_sq();
    let passed = slope <= cfg.wide_window_slope_max && decreasing;
    Ok(CheckReport::new(
        &name,
        passed,
        vec![slope, residual[0], *residual.last().expect("non-empty")],
        vec![-3.0],
        cfg.wide_window_slope_max,
        format!(
            "slope {slope:.3} (needs <= {}), remainder {:.3e} -> {:.3e}, lambda_m - kappa^2 = {limit_gap:.3e} at l = {}",
            cfg.wide_window_slope_max,
            residual[0],
            residual.last().expect("non-empty"),
            l_list.last().expect("non-empty")
        ),
    ))
}

/// Emergence data along the ladder `l = l_n + eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmergenceRun {
    pub d: f64,
    pub n: usize,
    pub l_n: f64,
    pub mu: f64,
    pub eps: Vec<f64>,
    pub lambda: Vec<f64>,
    pub predicted: Vec<f64>,
    pub exponent: f64,
    /// `C` of the fit `(1 - lambda) / eps^2 = C + D eps`.
    pub coefficient: f64,
}

pub fn emergence_run(d: f64, n: usize, ladder: &[f64], cfg: &VerifyConfig) -> Result<EmergenceRun> {
    if n < 2 {
        return domain("emergence check needs n >= 2");
    }
    if ladder.len() < 2 {
        return domain("emergence ladder needs at least two steps");
    }
    let g = Geometry::new(d, 1.0)?;
    let basis = ModeBasis::new(&g, cfg.n_modes)?;
    let copts = CriticalOptions {
        tol: cfg.tol,
        ..CriticalOptions::default()
    };
    let l_n = critical_lengths_with(&basis, n, &copts)?[n - 1];
    let ts = threshold_solution_with(&basis, n, l_n, &ThresholdOptions::default())?;
    let opts = SolveOptions {
        tol: cfg.tol.min(1e-12),
        ..cfg.solve_options()
    };
    let mut lambda = Vec::new();
    let mut predicted = Vec::new();
    for &e in ladder {
        let p = solve_with_basis(&basis, l_n + e, n, &opts)?;
        lambda.push(p.lambda);
        predicted.push(1.0 - ts.mu * ts.mu * e * e);
    }
    let lx: Vec<f64> = ladder.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = lambda.iter().map(|l| (1.0 - l).ln()).collect();
    let (exponent, _) = line_fit(&lx, &ly)?;
    let rows: Vec<Vec<f64>> = ladder.iter().map(|&e| vec![1.0, e]).collect();
    let y: Vec<f64> = ladder.iter().zip(&lambda).map(|(e, l)| (1.0 - l) / (e * e)).collect();
    let coefficient = least_squares(&rows, &y)?[0];
    Ok(EmergenceRun {
        d,
        n,
        l_n,
        mu: ts.mu,
        eps: ladder.to_vec(),
        lambda,
        predicted,
        exponent,
        coefficient,
    })
}

pub fn check_emergence(d: f64, n: usize, n_modes: usize) -> Result<CheckReport> {
    check_emergence_with(
        d,
        n,
        &VerifyConfig {
            n_modes,
            ..VerifyConfig::default()
        },
    )
}

/// Exponent of `1 - lambda_n` in `l - l_n` and its coefficient against `mu_n^2`.
pub fn check_emergence_with(d: f64, n: usize, cfg: &VerifyConfig) -> Result<CheckReport> {
    let run = emergence_run(d, n, &cfg.emergence_ladder, cfg)?;
    let mu2 = run.mu * run.mu;
    let rel = (run.coefficient - mu2).abs() / mu2;
    let exp_ok = (run.exponent - 2.0).abs() <= cfg.emergence_exponent_tol;
    let coeff_ok = rel <= cfg.emergence_coeff_rel;
    Ok(CheckReport::new(
        &format!("emergence(d={d:.6}, n={n})"),
        exp_ok && coeff_ok,
        vec![run.exponent, run.coefficient],
        vec![2.0, mu2],
        cfg.emergence_coeff_rel,
        format!(
            "l_n = {:.6}, mu = {:.6}; exponent {:.4} (2 +- {}), coefficient {:.6} vs mu^2 = {mu2:.6} (rel {rel:.3e}, tol {})",
            run.l_n, run.mu, run.exponent, cfg.emergence_exponent_tol, run.coefficient, cfg.emergence_coeff_rel
        ),
    ))
}

/// Emergence coefficient against `pi alpha^2 / 2` and the edge exponent,
/// both extrapolated in `1/N`.
pub fn check_edge_identity(d: f64, n: usize, cfg: &VerifyConfig) -> Result<CheckReport> {
    let id = edge_identity(d, n, cfg.n_modes, cfg.tol)?;
    let rel = (id.alpha_prediction - id.energy_extrapolated).abs() / id.energy_extrapolated;
    let exp_dev = (id.exponent_extrapolated - 0.5).abs();
    let passed = rel <= cfg.mu_alpha_rel && exp_dev <= cfg.edge_exponent_tol;
    Ok(CheckReport::new(
        &format!("edge_identity(d={d:.6}, n={n})"),
        passed,
        vec![id.energy_extrapolated, id.alpha_prediction, id.exponent_extrapolated],
        vec![id.alpha_prediction, id.energy_extrapolated, 0.5],
        cfg.mu_alpha_rel,
        format!(
            "(1/l_n) int |d_1 phi|^2 = {:.6} vs pi alpha^2/2 = {:.6} (rel {rel:.3e}, tol {}); edge exponent {:.4} (0.5 +- {}); N = {:?}",
            id.energy_extrapolated, id.alpha_prediction, cfg.mu_alpha_rel, id.exponent_extrapolated, cfg.edge_exponent_tol, id.levels
        ),
    ))
}

/// One cell of the accumulation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccumulationCell {
    pub l: f64,
    pub m: usize,
    /// `None` when the selected eigenvalue does not exist at this `l`.
    pub lambda: Option<f64>,
    pub bound: f64,
}

pub fn check_accumulation(d: f64, xi: f64, l_list: &[f64], n_modes: usize) -> Result<CheckReport> {
    check_accumulation_with(
        d,
        xi,
        l_list,
        &VerifyConfig {
            n_modes,
            ..VerifyConfig::default()
        },
    )
}

/// `|lambda_m - xi| <= pi^2/(4 l^2) (1 + 4 l sqrt(1 - kappa^2) / pi)` with
/// `xi` in `[Lambda_{m-1}, Lambda_m)`, and the gap shrinking with `l`.
pub fn check_accumulation_with(d: f64, xi: f64, l_list: &[f64], cfg: &VerifyConfig) -> Result<CheckReport> {
    let g0 = Geometry::new(d, 1.0)?;
    if !(xi >= g0.kappa_sq() && xi < 1.0) {
        return domain(format!("xi = {xi} must lie in [kappa^2, 1) = [{}, 1)", g0.kappa_sq()));
    }
    if l_list.is_empty() || l_list.windows(2).any(|w| w[1] <= w[0]) || l_list[0] <= 0.0 {
        return domain("accumulation check needs an increasing list of positive lengths");
    }
    let basis = ModeBasis::new(&g0, cfg.n_modes)?;
    let mut cells = Vec::new();
    for &l in l_list {
        let g = g0.with_window(l)?;
        let m = (2.0 * l * (xi - g.kappa_sq()).sqrt() / PI).floor() as usize + 1;
        let bound = PI * PI / (4.0 * l * l) * (1.0 + 4.0 * l * g.counting_rate() / PI);
        let bracket = bracket_for(&g, m)?;
        let lambda = match solve_with_basis(&basis, l, m, &cfg.solve_options()) {
            Ok(p) => Some(p.lambda),
            Err(Error::NoSignChange { .. }) if !bracket.is_below_threshold => None,
            Err(e) => return Err(e),
        };
        cells.push(AccumulationCell { l, m, lambda, bound });
    }
    let mut notes = Vec::new();
    let mut passed = true;
    let mut gaps = Vec::new();
    for c in &cells {
        match c.lambda {
            Some(lam) => {
                let gap = (lam - xi).abs();
                gaps.push(gap);
                if gap > c.bound {
                    passed = false;
                }
                notes.push(format!("l = {}: m = {}, gap {gap:.3e} <= bound {:.3e}", c.l, c.m, c.bound));
            }
            None => notes.push(format!(
                "l = {}: m = {} not applicable (eigenvalue {} not yet emerged)",
                c.l, c.m, c.m
            )),
        }
    }
    let bound_ok = passed;
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    if !decreasing {
        passed = false;
        notes.push(format!(
            "gap not decreasing along l (bound {})",
            if bound_ok { "holds in every cell" } else { "violated" }
        ));
    }
    if gaps.is_empty() {
        passed = false;
        notes.push("no applicable cell".into());
    }
    Ok(CheckReport::new(
        &format!("accumulation(d={d:.6}, xi={xi:.4})"),
        passed,
        gaps,
        cells.iter().filter(|c| c.lambda.is_some()).map(|c| c.bound).collect(),
        0.0,
        notes.join("; "),
    ))
}

fn ray_slope(field: &FieldExpansion, x2: f64, start: f64, length: f64) -> Result<f64> {
    let mut len = length;
    loop {
        let xs: Vec<f64> = (0..=40).map(|i| start + len * i as f64 / 40.0).collect();
        let vals = xs.iter().map(|&x| field.value(x, x2)).collect::<Result<Vec<_>>>()?;
        if vals.iter().all(|v| v.abs() > 1e-280) {
            let ly: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
            return Ok(line_fit(&xs, &ly)?.0);
        }
        len *= 0.5;
        if len < 0.5 {
            return Err(Error::Fit("field underflows along the decay ray".into()));
        }
    }
}

/// Decay rates along `x2 = pi/2` and `x2 = -d/2` beyond the window.
pub fn check_decay(ef: &EigenfunctionExpansion, g: &Geometry) -> Result<CheckReport> {
    check_decay_with(ef, g, &VerifyConfig::default())
}

pub fn check_decay_with(ef: &EigenfunctionExpansion, g: &Geometry, cfg: &VerifyConfig) -> Result<CheckReport> {
    let lambda = ef.spectral.lambda;
    let k = ef.spectral.k;
    let lower_rate = (PI * PI / (g.d() * g.d()) - lambda).sqrt();
    let start = g.l() + 2.0;
    let upper_slope = ray_slope(&ef.field, PI / 2.0, start, 8.0)?;
    let lower_slope = ray_slope(&ef.field, -g.d() / 2.0, start, 8.0)?;
    let up_rel = (upper_slope + k).abs() / k;
    let low_rel = (lower_slope + lower_rate).abs() / lower_rate;
    let passed = up_rel <= cfg.decay_upper_rel && low_rel <= cfg.decay_lower_rel;
    Ok(CheckReport::new(
        &format!("decay(d={:.6}, l={}, m={})", g.d(), g.l(), ef.spectral.m),
        passed,
        vec![upper_slope, lower_slope],
        vec![-k, -lower_rate],
        cfg.decay_upper_rel,
        format!(
            "upper slope {upper_slope:.6} vs -k = {:.6} (rel {up_rel:.2e}, tol {}); lower slope {lower_slope:.6} vs {:.6} (rel {low_rel:.2e}, tol {})",
            -k, cfg.decay_upper_rel, -lower_rate, cfg.decay_lower_rel
        ),
    ))
}

/// Odd fields vanish on `x1 = 0`; even fields have zero `x1`-derivative there.
pub fn check_parity(ef: &EigenfunctionExpansion, g: &Geometry) -> Result<CheckReport> {
    let samples: Vec<f64> = (1..40).map(|i| -g.d() + (PI + g.d()) * i as f64 / 40.0).collect();
    let mut scale: f64 = 0.0;
    for &x2 in &samples {
        for i in 0..=20 {
            scale = scale.max(ef.field.value(g.l() * i as f64 / 20.0, x2)?.abs());
        }
    }
    let mut worst: f64 = 0.0;
    for &x2 in &samples {
        let v = match ef.spectral.parity {
            Parity::Odd => ef.field.value(0.0, x2)?,
            Parity::Even => ef.field.dx1(0.0, x2)?,
        };
        worst = worst.max(v.abs());
    }
    let rel = worst / scale;
    let what = match ef.spectral.parity {
        Parity::Odd => "|u(0, x2)|",
        Parity::Even => "|du/dx1(0, x2)|",
    };
    Ok(CheckReport::new(
        &format!("parity(d={:.6}, l={}, m={})", g.d(), g.l(), ef.spectral.m),
        rel <= 1e-10,
        vec![rel],
        vec![0.0],
        1e-10,
        format!("max {what} / max |u| = {rel:.2e} ({})", ef.spectral.parity.as_str()),
    ))
}

/// Eigenvalue count jumps from `n - 1` to `n` across each `l_n`, `n = 2..=n_max`.
pub fn check_criticality(d: f64, n_max: usize, cfg: &VerifyConfig) -> Result<CheckReport> {
    let g = Geometry::new(d, 1.0)?;
    let basis = ModeBasis::new(&g, cfg.n_modes)?;
    let copts = CriticalOptions {
        tol: cfg.tol,
        ..CriticalOptions::default()
    };
    let crit = critical_lengths_with(&basis, n_max, &copts)?;
    let mut measured = Vec::new();
    let mut expected = Vec::new();
    let mut notes = Vec::new();
    let mut passed = true;
    for n in 2..=n_max {
        let ln = crit[n - 1];
        let before = discrete_spectrum_with(&basis, ln - cfg.count_delta, &cfg.solve_options())?;
        let after = discrete_spectrum_with(&basis, ln + cfg.count_delta, &cfg.solve_options())?;
        let (cb, ca) = (before.points.len(), after.points.len());
        measured.extend([cb as f64, ca as f64]);
        expected.extend([(n - 1) as f64, n as f64]);
        if cb != n - 1 || ca != n || !before.warnings.is_empty() || !after.warnings.is_empty() {
            passed = false;
        }
        notes.push(format!("l_{n} = {ln:.6}: {cb} -> {ca}"));
    }
    notes.push("n = 1 has l_1 = 0 and no count below it".into());
    Ok(CheckReport::new(
        &format!("criticality(d={d:.6})"),
        passed,
        measured,
        expected,
        cfg.count_delta,
        notes.join("; "),
    ))
}

fn l2_on_box(a: &FieldExpansion, b: Option<&FieldExpansion>, half: f64, d: f64, spacing: f64) -> Result<f64> {
    let n1 = (2.0 * half / spacing).round() as usize;
    let n2 = ((PI + d) / spacing).round() as usize;
    let (h1, h2) = (2.0 * half / n1 as f64, (PI + d) / n2 as f64);
    let mut sum = 0.0;
    for i in 0..n1 {
        let x1 = -half + (i as f64 + 0.5) * h1;
        for j in 0..n2 {
            let x2 = -d + (j as f64 + 0.5) * h2;
            let mut v = a.value(x1, x2)?;
            if let Some(b) = b {
                v -= b.value(x1, x2)?;
            }
            sum += v * v;
        }
    }
    Ok((sum * h1 * h2).sqrt())
}

/// Relative discrete `L^2` distance over `|x1| < R` between the eigenfunction
/// at `l_n + eps` and the threshold solution.
pub fn check_convergence_at_criticality(d: f64, n: usize, cfg: &VerifyConfig) -> Result<CheckReport> {
    let g = Geometry::new(d, 1.0)?;
    let basis = ModeBasis::new(&g, cfg.n_modes)?;
    let copts = CriticalOptions {
        tol: cfg.tol,
        ..CriticalOptions::default()
    };
    let l_n = critical_lengths_with(&basis, n, &copts)?[n - 1];
    let ts = threshold_solution_with(&basis, n, l_n, &ThresholdOptions::default())?;
    let norm = l2_on_box(&ts.field, None, cfg.convergence_box, d, cfg.convergence_spacing)?;
    let opts = SolveOptions {
        tol: cfg.tol.min(1e-12),
        ..cfg.solve_options()
    };
    let mut dist = Vec::new();
    for &e in &cfg.emergence_ladder {
        let p = solve_with_basis(&basis, l_n + e, n, &opts)?;
        let ef = eigenfunction_with_basis(&basis, l_n + e, &p, NULL_RESIDUAL_LIMIT)?;
        dist.push(l2_on_box(&ef.field, Some(&ts.field), cfg.convergence_box, d, cfg.convergence_spacing)? / norm);
    }
    let lx: Vec<f64> = cfg.emergence_ladder.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = dist.iter().map(|v| v.ln()).collect();
    let (exponent, _) = line_fit(&lx, &ly)?;
    Ok(CheckReport::new(
        &format!("convergence_at_criticality(d={d:.6}, n={n})"),
        exponent >= cfg.convergence_exponent_min,
        vec![exponent],
        vec![0.5],
        cfg.convergence_exponent_min,
        format!(
            "relative L2 distances {:?} over |x1| < {} for eps = {:?}; fitted exponent {exponent:.3} (needs >= {})",
            dist.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            cfg.convergence_box,
            cfg.emergence_ladder,
            cfg.convergence_exponent_min
        ),
    ))
}

/// Mode-matching and finite-difference eigenvalues side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub matching: Vec<ExtrapolatedPoint>,
    pub oracle: OracleEstimate,
    pub rel_diff: Vec<f64>,
}

/// Coarsest mesh size among `pi/32, pi/16, pi/8` whose second halving
/// stays within `budget` unknowns.
pub fn auto_coarse_mesh(g: &Geometry, r: f64, budget: usize) -> Result<f64> {
    for n2 in [32.0, 16.0, 8.0] {
        let h = PI / n2;
        let grid = build_grid(g, r, h)?.refined().refined();
        if grid.unknowns(Parity::Even) + grid.unknowns(Parity::Odd) <= budget {
            return Ok(h);
        }
    }
    Ok(PI / 8.0)
}

pub fn compare_with_oracle(g: &Geometry, cfg: &VerifyConfig, oracle_h: Option<f64>, oracle_r: Option<f64>) -> Result<OracleComparison> {
    let levels = [cfg.n_modes, 2 * cfg.n_modes, 4 * cfg.n_modes];
    let matching = extrapolated_spectrum(g, &levels, cfg.tol)?;
    if matching.is_empty() {
        return domain("no eigenvalue to compare");
    }
    let k_min = matching.iter().map(|p| (1.0 - p.lambda).sqrt()).fold(f64::INFINITY, f64::min);
    let r = oracle_r.unwrap_or_else(|| suggested_truncation(g.l(), k_min));
    let h = match oracle_h {
        Some(h) => h,
        None => auto_coarse_mesh(g, r, cfg.oracle_budget)?,
    };
    let oracle = oracle_extrapolated(g, r, h, matching.len())?;
    let rel_diff = matching
        .iter()
        .zip(&oracle.mixed)
        .map(|(p, o)| (p.lambda - o).abs() / o)
        .collect();
    Ok(OracleComparison { matching, oracle, rel_diff })
}

pub fn check_oracle(d: f64, l: f64, cfg: &VerifyConfig) -> Result<CheckReport> {
    let g = Geometry::new(d, l)?;
    let cmp = compare_with_oracle(&g, cfg, None, None)?;
    let complete = cmp.oracle.mixed.len() == cmp.matching.len();
    let worst = cmp.rel_diff.iter().copied().fold(0.0, f64::max);
    let passed = complete && worst <= cfg.oracle_rel;
    let pairs: Vec<String> = cmp
        .matching
        .iter()
        .zip(&cmp.oracle.mixed)
        .zip(&cmp.oracle.spread)
        .map(|((p, o), s)| format!("m={}: {:.7} vs {:.7} (fd spread {:.1e})", p.m, p.lambda, o, s))
        .collect();
    Ok(CheckReport::new(
        &format!("oracle(d={d:.6}, l={l})"),
        passed,
        cmp.matching.iter().map(|p| p.lambda).collect(),
        cmp.oracle.mixed.clone(),
        cfg.oracle_rel,
        format!(
            "{}; worst rel {worst:.2e} (tol {}, target {}){}",
            pairs.join(", "),
            cfg.oracle_rel,
            cfg.oracle_rel_target,
            if complete { "" } else { "; oracle missed an eigenvalue" }
        ),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    /// All checks except the finite-difference comparison.
    Default,
    /// Adds the finite-difference comparison.
    Full,
}

/// Runs the suite at one `d`; reports come back in a fixed order.
pub fn run_suite(d: f64, suite: Suite, cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
    let g0 = Geometry::new(d, 1.0)?;
    let mut out = Vec::new();
    let bracket_grid = [0.5, 1.0, 2.0, 4.0, 6.0];
    let table = sweep_over_l(d, &bracket_grid, cfg.n_modes, cfg.tol)?;
    out.push(check_brackets(&table));
    out.push(check_counting(&table));
    let fine: Vec<f64> = (0..=55).map(|i| 0.5 + 0.1 * i as f64).collect();
    let table = sweep_over_l(d, &fine, cfg.n_modes, cfg.tol)?;
    out.push(check_trajectories(&table, cfg.trajectory_jump_factor));
    for m in [1, 2] {
        out.push(check_wide_window_with(d, m, &[8.0, 12.0, 16.0, 24.0, 32.0], cfg)?);
    }
    out.push(check_emergence_with(d, 2, cfg)?);
    out.push(check_edge_identity(d, 2, cfg)?);
    for xi in [g0.kappa_sq() + 0.05, 0.5, 0.9] {
        out.push(check_accumulation_with(d, xi, &[4.0, 8.0, 16.0], cfg)?);
    }
    let basis = ModeBasis::new(&g0, cfg.n_modes)?;
    for m in [1, 2] {
        let l = 4.0;
        let g = g0.with_window(l)?;
        let p = solve_with_basis(&basis, l, m, &cfg.solve_options())?;
        let ef = eigenfunction_with_basis(&basis, l, &p, NULL_RESIDUAL_LIMIT)?;
        out.push(check_decay_with(&ef, &g, cfg)?);
        out.push(check_parity(&ef, &g)?);
    }
    out.push(check_criticality(d, 3, cfg)?);
    out.push(check_convergence_at_criticality(d, 2, cfg)?);
    if suite == Suite::Full {
        let l = if g0.is_symmetric() { 2.0 } else { 3.0 };
        out.push(check_oracle(d, l, cfg)?);
    }
    Ok(out)
}
