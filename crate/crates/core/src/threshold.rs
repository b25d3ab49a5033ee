//! Critical window lengths and threshold solutions at `lambda = 1`.
//!
//! At the threshold the leading upper-strip mode has rate zero and continues
//! as the bounded function `sqrt(2/pi) sin x2`; every other outer mode still
//! decays. A window length is critical when the matching system at
//! `lambda = 1` is singular.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{least_squares, null_vector};
use crate::matching::{indicator, FieldExpansion, Indicator, MatchingMatrix, ModeBasis, Parity};
use crate::roots::bracketed_root;
use crate::spectrum::extrapolation_weights;

/// Matching matrix at `lambda = 1` for the window of `g`.
pub fn assemble_threshold(g: &Geometry, parity: Parity, n_modes: usize) -> Result<MatchingMatrix> {
    ModeBasis::new(g, n_modes)?.assemble(g.l(), 1.0, parity)
}

pub fn threshold_indicator(basis: &ModeBasis, l: f64, parity: Parity) -> Result<Indicator> {
    Ok(indicator(&basis.assemble(l, 1.0, parity)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalOptions {
    /// Bisection tolerance in `l`.
    pub tol: f64,
    /// Scan grid spacing.
    pub step: f64,
    /// First scan point.
    pub l_min: f64,
    /// Scan cap; `None` picks one from the counting bound.
    pub l_max: Option<f64>,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            step: 0.05,
            l_min: 0.05,
            l_max: None,
        }
    }
}

/// Default scan cap: a margin above the length where the counting bound
/// first allows `n_max` eigenvalues.
pub fn default_scan_cap(g: &Geometry, n_max: usize) -> f64 {
    n_max as f64 * PI / (2.0 * g.counting_rate()) + 1.0
}

fn scan_parity(basis: &ModeBasis, parity: Parity, lo: f64, hi: f64, opts: &CriticalOptions) -> Result<Vec<f64>> {
    let n = ((hi - lo) / opts.step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let eval = |l: &f64| threshold_indicator(basis, *l, parity);

    #[cfg(feature = "parallel")]
    let signs: Vec<Result<Indicator>> = {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let signs: Vec<Result<Indicator>> = grid.iter().map(eval).collect();
    let signs = signs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut roots = Vec::new();
    for i in 0..n {
        let (s0, s1) = (signs[i].sign, signs[i + 1].sign);
        if s0 == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if s0 == s1 || s1 == 0.0 {
            continue;
        }
        let mut reference: Option<f64> = None;
        let root = bracketed_root(
            |l| threshold_indicator(basis, l, parity).map(|v| v.sign).unwrap_or(f64::NAN),
            |l, a, b| {
                let r = *reference.get_or_insert_with(|| {
                    let la = threshold_indicator(basis, a, parity).map(|v| v.log_abs).unwrap_or(0.0);
                    let lb = threshold_indicator(basis, b, parity).map(|v| v.log_abs).unwrap_or(0.0);
                    la.max(lb)
                });
                threshold_indicator(basis, l, parity)
                    .map(|v| v.sign * (v.log_abs - r).exp())
                    .unwrap_or(f64::NAN)
            },
            grid[i],
            grid[i + 1],
            1e-8,
            opts.tol,
        );
        if let Some(r) = root {
            roots.push(r);
        }
    }
    Ok(roots)
}

/// `[0, l_2, ..., l_{n_max}]`: the first entry is the convention `l_1 = 0`.
pub fn critical_lengths(d: f64, n_max: usize, n_modes: usize, tol: f64) -> Result<Vec<f64>> {
    let g = Geometry::new(d, 1.0)?;
    let basis = ModeBasis::new(&g, n_modes)?;
    critical_lengths_with(
        &basis,
        n_max,
        &CriticalOptions {
            tol,
            ..CriticalOptions::default()
        },
    )
}

pub fn critical_lengths_with(basis: &ModeBasis, n_max: usize, opts: &CriticalOptions) -> Result<Vec<f64>> {
    if n_max < 2 {
        return domain("critical_lengths needs n_max >= 2");
    }
    let cap = opts.l_max.unwrap_or_else(|| default_scan_cap(basis.geometry(), n_max));
    if !(cap > opts.l_min) {
        return domain(format!("scan cap {cap} below the first scan point {}", opts.l_min));
    }
    let odd = scan_parity(basis, Parity::Odd, opts.l_min, cap, opts)?;
    let even = scan_parity(basis, Parity::Even, opts.l_min, cap, opts)?;
    let mut out = vec![0.0];
    for n in 2..=n_max {
        let next = if n % 2 == 0 {
            odd.get(n / 2 - 1)
        } else {
            even.get((n - 1) / 2 - 1)
        };
        match next {
            Some(&l) => out.push(l),
            None => {
                return Err(Error::GridExhausted {
                    found: out.len() - 1,
                    wanted: n_max - 1,
                    cap,
                })
            }
        }
    }
    Ok(out)
}

/// Critical length of index `n` nearest to `guess`, from a local scan.
pub fn refine_critical_length(basis: &ModeBasis, n: usize, guess: f64, tol: f64) -> Result<f64> {
    if n < 2 {
        return domain("refinement needs n >= 2");
    }
    let opts = CriticalOptions {
        tol,
        step: 0.02,
        l_min: (guess - 0.3).max(1e-3),
        l_max: Some(guess + 0.6),
    };
    let roots = scan_parity(basis, Parity::for_index(n), opts.l_min, guess + 0.6, &opts)?;
    roots
        .into_iter()
        .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
        .ok_or(Error::GridExhausted {
            found: 0,
            wanted: 1,
            cap: guess + 0.6,
        })
}

/// Bounded solution at `lambda = 1` for the critical length `l_n`.
#[derive(Debug, Clone)]
pub struct ThresholdSolution {
    pub n: usize,
    pub l_n: f64,
    pub d: f64,
    pub parity: Parity,
    /// Window amplitudes.
    pub a: Vec<f64>,
    /// Upper amplitudes beyond the zero mode.
    pub b_tail: Vec<f64>,
    /// Lower amplitudes; for `d = pi` the first entry is the mirror image of
    /// the upper zero mode.
    pub c_tail: Vec<f64>,
    /// Coefficient of `sin x2` in the far field, `sqrt(2/pi)`.
    pub zero_mode_coeff: f64,
    pub mu: f64,
    /// Fitted amplitude of `r^{1/2} sin(theta/2)` at the window edge.
    pub alpha: f64,
    pub sigma_min: f64,
    pub sigma_second: f64,
    pub n_modes: usize,
    pub field: FieldExpansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdOptions {
    /// Uniqueness fails when the second singular value is below this.
    pub uniqueness_floor: f64,
    /// Radii `[r0, r1]` used for the edge fit, measured from `x1 = l`.
    pub alpha_band: (f64, f64),
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            uniqueness_floor: 1e-7,
            alpha_band: (0.05, 0.5),
        }
    }
}

pub fn threshold_solution(d: f64, n: usize, l_n: f64, n_modes: usize) -> Result<ThresholdSolution> {
    let g = Geometry::new(d, l_n)?;
    let basis = ModeBasis::new(&g, n_modes)?;
    threshold_solution_with(&basis, n, l_n, &ThresholdOptions::default())
}

pub fn threshold_solution_with(
    basis: &ModeBasis,
    n: usize,
    l_n: f64,
    opts: &ThresholdOptions,
) -> Result<ThresholdSolution> {
    if n == 0 {
        return domain("critical index starts at 1");
    }
    if !(l_n > 0.0) {
        return domain("threshold solution needs l_n > 0");
    }
    let parity = Parity::for_index(n);
    let mm = basis.assemble(l_n, 1.0, parity)?;
    let (v, smin, s2) = null_vector(&mm.entries)?;
    if s2 < opts.uniqueness_floor {
        return Err(Error::NotUnique(s2));
    }
    let mut field = FieldExpansion::from_null_vector(basis, &mm, &v);
    let lead = field.b()[0];
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Residual {
            residual: smin,
            limit: opts.uniqueness_floor,
        });
    }
    field.scale(1.0 / lead);
    let alpha = fit_edge_coefficient(&field, opts.alpha_band)?;
    let d = basis.d();
    let mut ts = ThresholdSolution {
        n,
        l_n,
        d,
        parity,
        a: field.a().to_vec(),
        b_tail: field.b()[1..].to_vec(),
        c_tail: field.c().to_vec(),
        zero_mode_coeff: (2.0 / PI).sqrt() * field.b()[0],
        mu: 0.0,
        alpha,
        sigma_min: smin,
        sigma_second: s2,
        n_modes: basis.n_modes(),
        field,
    };
    ts.mu = mu_coefficient(&ts);
    Ok(ts)
}

/// `(1/l_n) int |d phi/dx1|^2`, or `1/(2 l_n)` times the integral when `d = pi`.
pub fn mu_coefficient(ts: &ThresholdSolution) -> f64 {
    let factor = if ts.d == PI { 0.5 } else { 1.0 };
    factor * ts.field.dx1_energy() / ts.l_n
}

/// `1 - mu^2 (l - l_n)^2`, valid for small `l - l_n >= 0`.
pub fn emergence_prediction(ts: &ThresholdSolution, l: f64) -> Result<f64> {
    if !(l >= ts.l_n) {
        return domain(format!(
            "l = {l} is not beyond the critical length {}: no eigenvalue near the threshold",
            ts.l_n
        ));
    }
    let e = l - ts.l_n;
    Ok(1.0 - ts.mu * ts.mu * e * e)
}

fn band_samples(field: &FieldExpansion, band: (f64, f64), count: usize, log_spaced: bool) -> Result<Vec<(f64, f64)>> {
    let (r0, r1) = (band.0, band.1.min(0.5 * field.l()));
    if !(r0 > 0.0 && r1 > r0) {
        return Err(Error::Fit(format!("edge band [{r0}, {r1}] is empty")));
    }
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            let r = if log_spaced {
                r0 * (r1 / r0).powf(t)
            } else {
                r0 + (r1 - r0) * t
            };
            Ok((r, field.value(field.l() - r, 0.0)?))
        })
        .collect()
}

/// Fits `phi / sqrt(r)` by a cubic in `r` along the window side of the edge,
/// where `sin(theta/2) = 1`; the constant term is the edge coefficient.
pub fn fit_edge_coefficient(field: &FieldExpansion, band: (f64, f64)) -> Result<f64> {
    let samples = band_samples(field, band, 48, false)?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|&(r, _)| vec![1.0, r, r * r, r * r * r]).collect();
    let y: Vec<f64> = samples.iter().map(|&(r, v)| v / r.sqrt()).collect();
    Ok(least_squares(&rows, &y)?[0])
}

/// Exponent `p` of `|phi| ~ A r^p (1 + c r)` along the window side of the edge.
pub fn edge_exponent(field: &FieldExpansion, band: (f64, f64)) -> Result<f64> {
    let samples = band_samples(field, band, 48, true)?;
    if samples.iter().any(|&(_, v)| v == 0.0) {
        return Err(Error::Fit("field vanishes inside the edge band".into()));
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|&(r, _)| vec![1.0, r.ln(), r]).collect();
    let y: Vec<f64> = samples.iter().map(|&(_, v)| v.abs().ln()).collect();
    Ok(least_squares(&rows, &y)?[1])
}

/// Edge coefficient and emergence coefficient at two truncations `N`, `2N`,
/// each extrapolated linearly in `1/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeIdentity {
    pub levels: Vec<usize>,
    pub l_n: Vec<f64>,
    pub alpha: Vec<f64>,
    /// `(1/l_n) int |d phi/dx1|^2` without the symmetric-case factor.
    pub energy_per_length: Vec<f64>,
    pub alpha_extrapolated: f64,
    pub energy_extrapolated: f64,
    /// `pi alpha^2 / 2` from the extrapolated edge coefficient.
    pub alpha_prediction: f64,
    /// Edge exponent fitted at each level, then extrapolated.
    pub exponent: Vec<f64>,
    pub exponent_extrapolated: f64,
}

pub fn edge_identity(d: f64, n: usize, n_modes: usize, tol: f64) -> Result<EdgeIdentity> {
    let levels = vec![n_modes, 2 * n_modes];
    let g = Geometry::new(d, 1.0)?;
    let mut l_n = Vec::new();
    let mut alpha = Vec::new();
    let mut energy = Vec::new();
    let mut exponent = Vec::new();
    let mut guess: Option<f64> = None;
    for &nm in &levels {
        let basis = ModeBasis::new(&g, nm)?;
        let ln = match guess {
            None => {
                let opts = CriticalOptions {
                    tol,
                    ..CriticalOptions::default()
                };
                critical_lengths_with(&basis, n, &opts)?[n - 1]
            }
            Some(x) => refine_critical_length(&basis, n, x, tol)?,
        };
        guess = Some(ln);
        let ts = threshold_solution_with(&basis, n, ln, &ThresholdOptions::default())?;
        l_n.push(ln);
        alpha.push(ts.alpha.abs());
        energy.push(ts.field.dx1_energy() / ln);
        exponent.push(edge_exponent(&ts.field, ThresholdOptions::default().alpha_band)?);
    }
    let w = extrapolation_weights(&levels.iter().map(|&m| 1.0 / m as f64).collect::<Vec<_>>())?;
    let alpha_extrapolated: f64 = w.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let energy_extrapolated: f64 = w.iter().zip(&energy).map(|(a, b)| a * b).sum();
    let exponent_extrapolated: f64 = w.iter().zip(&exponent).map(|(a, b)| a * b).sum();
    Ok(EdgeIdentity {
        levels,
        l_n,
        alpha,
        energy_per_length: energy,
        alpha_extrapolated,
        energy_extrapolated,
        alpha_prediction: PI * alpha_extrapolated * alpha_extrapolated / 2.0,
        exponent,
        exponent_extrapolated,
    })
}
