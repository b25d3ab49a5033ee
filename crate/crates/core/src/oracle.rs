//! Five-point finite-difference check on the truncated domain `|x1| < R`.
//!
//! Each parity is solved on the half domain `0 <= x1 < R`: Neumann at
//! `x1 = 0` for even fields, Dirichlet for odd ones. The grid is
//! anisotropic, `h2 = pi / n2` across the strips and `h1 = l / n_l` along
//! them, so that `x2 = -d, 0, pi` and `x1 = l` are all grid lines. The
//! smallest eigenvalues come from Lanczos on the inverse of a banded
//! Cholesky factor.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::Geometry;
use crate::linalg::{lanczos_largest, BandedSpd};
use crate::matching::Parity;

/// Diagonal placed on wall nodes, which stay in the band as decoupled rows.
const WALL_DIAGONAL: f64 = 1e6;
const LANCZOS_STEPS: usize = 240;
const LANCZOS_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGrid {
    pub g: Geometry,
    /// Truncation half-length after snapping to the `x1` spacing.
    pub r: f64,
    /// Cross-strip spacing `h2`, the nominal mesh size.
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
    /// Cells across the upper strip.
    pub n2: usize,
    /// Cells across the lower strip.
    pub nd: usize,
    /// Cells along the half window.
    pub n_l: usize,
    /// Cells along `0 < x1 < R`.
    pub n_r: usize,
    /// Interior nodes along `x1` on the full domain `|x1| < R`.
    pub nx: usize,
    /// Interior nodes along `x2`.
    pub ny: usize,
    pub window_aligned: bool,
}

impl OracleGrid {
    /// Same domain with every spacing halved.
    pub fn refined(&self) -> OracleGrid {
        let n2 = 2 * self.n2;
        let nd = 2 * self.nd;
        let n_l = 2 * self.n_l;
        let n_r = 2 * self.n_r;
        let h2 = PI / n2 as f64;
        let h1 = if n_l > 0 { self.g.l() / n_l as f64 } else { self.h1 / 2.0 };
        OracleGrid {
            r: n_r as f64 * h1,
            h: h2,
            h1,
            h2,
            n2,
            nd,
            n_l,
            n_r,
            nx: 2 * n_r - 1,
            ny: n2 + nd - 1,
            ..*self
        }
    }

    /// Nodes on `x2 = 0` strictly inside the window.
    pub fn open_window_nodes(&self) -> usize {
        if self.n_l == 0 {
            0
        } else {
            2 * self.n_l - 1
        }
    }

    /// Bottom of the essential spectrum of the discrete operator.
    pub fn discrete_threshold(&self) -> f64 {
        let s = (0.5 * self.h2).sin();
        4.0 * s * s / (self.h2 * self.h2)
    }

    /// Unknowns of one parity block.
    pub fn unknowns(&self, parity: Parity) -> usize {
        let cols = match parity {
            Parity::Even => self.n_r,
            Parity::Odd => self.n_r - 1,
        };
        cols * self.ny
    }
}

pub fn build_grid(g: &Geometry, r: f64, h_target: f64) -> Result<OracleGrid> {
    if !(h_target > 0.0) || !h_target.is_finite() {
        return domain("mesh size must be positive");
    }
    if !(r > g.l()) {
        return domain(format!("truncation R = {r} must exceed l = {}", g.l()));
    }
    let ratio = g.d() / PI;
    let commensurate = |n2: usize| {
        let x = n2 as f64 * ratio;
        (x - x.round()).abs() < 1e-9 * x.max(1.0) && x.round() >= 1.0
    };
    let first = (PI / h_target).ceil() as usize;
    let last = (PI / (0.8 * h_target)).floor() as usize;
    let n2 = match (first.max(1)..=last.max(first)).find(|&n| commensurate(n) && PI / n as f64 >= 0.8 * h_target) {
        Some(n) => n,
        None => {
            let nearest = (first..first.saturating_mul(64).max(first + 1))
                .find(|&n| commensurate(n))
                .map(|n| PI / n as f64)
                .unwrap_or(f64::NAN);
            return Err(Error::InfeasibleGrid { h_target, nearest });
        }
    };
    let h2 = PI / n2 as f64;
    let nd = (n2 as f64 * ratio).round() as usize;
    let (n_l, h1) = if g.l() > 0.0 {
        let n_l = (g.l() / h2).ceil() as usize;
        (n_l, g.l() / n_l as f64)
    } else {
        (0, h2)
    };
    let n_r = (r / h1).round() as usize;
    Ok(OracleGrid {
        g: *g,
        r: n_r as f64 * h1,
        h: h2,
        h1,
        h2,
        n2,
        nd,
        n_l,
        n_r,
        nx: 2 * n_r - 1,
        ny: n2 + nd - 1,
        window_aligned: true,
    })
}

fn assemble_block(grid: &OracleGrid, parity: Parity) -> BandedSpd {
    let ny = grid.ny;
    let i0 = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let cols = grid.n_r - i0;
    let n = cols * ny;
    let mut a = BandedSpd::zeros(n, ny);
    let (c1, c2) = (1.0 / (grid.h1 * grid.h1), 1.0 / (grid.h2 * grid.h2));
    let wall_row = grid.nd - 1;
    let is_wall = |i: usize, b: usize| b == wall_row && i >= grid.n_l;
    for col in 0..cols {
        let i = col + i0;
        for b in 0..ny {
            let p = col * ny + b;
            if is_wall(i, b) {
                a.set(p, p, WALL_DIAGONAL);
                continue;
            }
            a.set(p, p, 2.0 * c1 + 2.0 * c2);
            if b > 0 && !is_wall(i, b - 1) {
                a.set(p, p - 1, -c2);
            }
            if col > 0 && !is_wall(i - 1, b) {
                let w = if parity == Parity::Even && i - 1 == 0 {
                    -std::f64::consts::SQRT_2 * c1
                } else {
                    -c1
                };
                a.set(p, p - ny, w);
            }
        }
    }
    a
}

/// Eigenvalue of the discrete operator with the parity block it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEigenvalue {
    pub lambda: f64,
    pub parity: Parity,
    /// Lanczos residual bound, in units of `lambda`.
    pub residual: f64,
}

/// Smallest `want` eigenvalues of one parity block below `cutoff`.
fn block_eigenvalues(grid: &OracleGrid, parity: Parity, want: usize, cutoff: f64) -> Result<Vec<OracleEigenvalue>> {
    if want == 0 {
        return Ok(Vec::new());
    }
    let a = assemble_block(grid, parity);
    let n = a.len();
    let mut shift = 0.9 * grid.g.kappa_sq();
    let chol = loop {
        match a.clone().cholesky(shift) {
            Ok(c) => break c,
            Err(e) if shift == 0.0 => return Err(e),
            Err(_) => shift = if shift < 1e-3 { 0.0 } else { 0.5 * shift },
        }
    };
    let ritz = lanczos_largest(n, want, LANCZOS_STEPS, LANCZOS_TOL, |x, y| {
        y.copy_from_slice(x);
        chol.solve_in_place(y);
    });
    let mut out = Vec::new();
    for (theta, res) in ritz {
        if theta <= 0.0 {
            continue;
        }
        let lambda = shift + 1.0 / theta;
        let lambda_res = res / (theta * theta);
        if lambda >= cutoff {
            continue;
        }
        if res > 1e-8 * theta {
            return Err(Error::NoConvergence {
                what: format!("Lanczos for the {} block near lambda = {lambda:.6}", parity.as_str()),
                iterations: LANCZOS_STEPS,
            });
        }
        out.push(OracleEigenvalue {
            lambda,
            parity,
            residual: lambda_res,
        });
    }
    Ok(out)
}

/// Up to `count` smallest eigenvalues below the discrete threshold, with
/// their parity. Eigenvalues alternate in parity, so the even block is
/// asked for `ceil(count/2)` values and the odd block for `floor(count/2)`.
pub fn oracle_spectrum(grid: &OracleGrid, count: usize) -> Result<Vec<OracleEigenvalue>> {
    let cutoff = grid.discrete_threshold();
    let mut all = block_eigenvalues(grid, Parity::Even, count.div_ceil(2), cutoff)?;
    all.extend(block_eigenvalues(grid, Parity::Odd, count / 2, cutoff)?);
    all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    all.truncate(count);
    Ok(all)
}

pub fn oracle_eigenvalues(grid: &OracleGrid, count: usize) -> Result<Vec<f64>> {
    Ok(oracle_spectrum(grid, count)?.into_iter().map(|e| e.lambda).collect())
}

/// Lowest eigenvalues of one parity block with no threshold cutoff.
pub fn oracle_lowest(grid: &OracleGrid, parity: Parity, count: usize) -> Result<Vec<f64>> {
    Ok(block_eigenvalues(grid, parity, count, f64::INFINITY)?
        .into_iter()
        .map(|e| e.lambda)
        .collect())
}

/// Dirichlet box `(0, width) x (0, height)` on an `n1 x n2` cell grid.
pub fn rectangle_eigenvalues(width: f64, height: f64, n1: usize, n2: usize, count: usize) -> Result<Vec<f64>> {
    if n1 < 2 || n2 < 2 {
        return domain("box grid needs at least two cells per side");
    }
    let (h1, h2) = (width / n1 as f64, height / n2 as f64);
    let ny = n2 - 1;
    let n = (n1 - 1) * ny;
    let mut a = BandedSpd::zeros(n, ny);
    let (c1, c2) = (1.0 / (h1 * h1), 1.0 / (h2 * h2));
    for col in 0..n1 - 1 {
        for b in 0..ny {
            let p = col * ny + b;
            a.set(p, p, 2.0 * c1 + 2.0 * c2);
            if b > 0 {
                a.set(p, p - 1, -c2);
            }
            if col > 0 {
                a.set(p, p - ny, -c1);
            }
        }
    }
    let chol = a.cholesky(0.0)?;
    let mut out: Vec<f64> = lanczos_largest(n, count, LANCZOS_STEPS, LANCZOS_TOL, |x, y| {
        y.copy_from_slice(x);
        chol.solve_in_place(y);
    })
    .into_iter()
    .map(|(t, _)| 1.0 / t)
    .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `(4 lambda_{h/2} - lambda_h) / 3`, removing an `O(h^2)` error.
pub fn richardson(lambda_h: f64, lambda_h2: f64) -> f64 {
    (4.0 * lambda_h2 - lambda_h) / 3.0
}

/// `2 lambda_{h/2} - lambda_h`, removing an `O(h)` error.
pub fn richardson_linear(lambda_h: f64, lambda_h2: f64) -> f64 {
    2.0 * lambda_h2 - lambda_h
}

/// `(8 lambda_{h/4} - 6 lambda_{h/2} + lambda_h) / 3`, removing both the
/// `O(h)` and `O(h^2)` terms.
pub fn richardson_mixed(lambda_h: f64, lambda_h2: f64, lambda_h4: f64) -> f64 {
    (8.0 * lambda_h4 - 6.0 * lambda_h2 + lambda_h) / 3.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleLevel {
    pub h1: f64,
    pub h2: f64,
    pub r: f64,
    pub unknowns: usize,
    pub eigenvalues: Vec<OracleEigenvalue>,
}

/// Three-level mesh study for one geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub levels: Vec<OracleLevel>,
    /// `O(h) + O(h^2)` elimination from all three levels.
    pub mixed: Vec<f64>,
    /// `O(h^2)` elimination from the two finest levels.
    pub quadratic: Vec<f64>,
    /// `O(h)` elimination from the two finest levels.
    pub linear: Vec<f64>,
    /// Largest distance between the three extrapolations.
    pub spread: Vec<f64>,
    pub parity: Vec<Parity>,
}

/// Runs the coarse grid and two halvings; keeps the eigenvalues present on
/// every level.
pub fn oracle_extrapolated(g: &Geometry, r: f64, h_coarse: f64, count: usize) -> Result<OracleEstimate> {
    let coarse = build_grid(g, r, h_coarse)?;
    let grids = [coarse, coarse.refined(), coarse.refined().refined()];
    let mut levels = Vec::new();
    for grid in &grids {
        let eigenvalues = oracle_spectrum(grid, count)?;
        levels.push(OracleLevel {
            h1: grid.h1,
            h2: grid.h2,
            r: grid.r,
            unknowns: grid.unknowns(Parity::Even) + grid.unknowns(Parity::Odd),
            eigenvalues,
        });
    }
    let common = levels.iter().map(|l| l.eigenvalues.len()).min().unwrap_or(0);
    let mut est = OracleEstimate {
        levels,
        mixed: Vec::new(),
        quadratic: Vec::new(),
        linear: Vec::new(),
        spread: Vec::new(),
        parity: Vec::new(),
    };
    for i in 0..common {
        let v: Vec<f64> = est.levels.iter().map(|l| l.eigenvalues[i].lambda).collect();
        let mixed = richardson_mixed(v[0], v[1], v[2]);
        let quadratic = richardson(v[1], v[2]);
        let linear = richardson_linear(v[1], v[2]);
        let hi = mixed.max(quadratic).max(linear);
        let lo = mixed.min(quadratic).min(linear);
        est.mixed.push(mixed);
        est.quadratic.push(quadratic);
        est.linear.push(linear);
        est.spread.push(hi - lo);
        est.parity.push(est.levels[2].eigenvalues[i].parity);
    }
    Ok(est)
}

/// `l + 10 / k`: the eigenfunction has decayed by `e^{-10}` at the cut.
pub fn suggested_truncation(l: f64, k: f64) -> f64 {
    l + 10.0 / k
}
