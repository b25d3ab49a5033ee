//! Enumeration of the discrete spectrum and sweeps over the window length.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::{bracket_for, Geometry, SpectralBracket};
use crate::matching::{solve_with_basis, ModeBasis, Parity, SolveOptions};

/// A located eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub m: usize,
    pub lambda: f64,
    /// `sqrt(1 - lambda)`, the decay rate along the upper strip.
    pub k: f64,
    pub parity: Parity,
    /// `|indicator|` at the returned `lambda`.
    pub residual: f64,
    pub bracket: SpectralBracket,
    pub n_modes_used: usize,
}

/// A bracket that should have held an eigenvalue but gave no sign change.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveWarning {
    pub l: f64,
    pub m: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSpectrum {
    pub geometry: Geometry,
    pub points: Vec<SpectralPoint>,
    pub warnings: Vec<SolveWarning>,
    /// Brackets reaching past the threshold that held no eigenvalue.
    pub empty_brackets: Vec<usize>,
}

pub fn discrete_spectrum(g: &Geometry, n_modes: usize, tol: f64) -> Result<DiscreteSpectrum> {
    let basis = ModeBasis::new(g, n_modes)?;
    discrete_spectrum_with(&basis, g.l(), &SolveOptions::with_tol(tol))
}

pub fn discrete_spectrum_with(basis: &ModeBasis, l: f64, opts: &SolveOptions) -> Result<DiscreteSpectrum> {
    let g = basis.geometry().with_window(l)?;
    if l <= 0.0 {
        return domain("l = 0: no window, the discrete spectrum below the threshold 1 is empty");
    }
    let mut out = DiscreteSpectrum {
        geometry: g,
        points: Vec::new(),
        warnings: Vec::new(),
        empty_brackets: Vec::new(),
    };
    let mut m = 1;
    loop {
        let bracket = bracket_for(&g, m)?;
        if bracket.lower >= 1.0 - opts.threshold_margin {
            break;
        }
        match solve_with_basis(basis, l, m, opts) {
            Ok(p) => out.points.push(p),
            Err(Error::NoSignChange { .. }) if !bracket.is_below_threshold => {
                out.empty_brackets.push(m);
            }
            Err(e) => out.warnings.push(SolveWarning {
                l,
                m,
                message: e.to_string(),
            }),
        }
        m += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub d: f64,
    pub l_values: Vec<f64>,
    pub rows: Vec<Vec<SpectralPoint>>,
    pub counts: Vec<usize>,
    pub warnings: Vec<SolveWarning>,
}

impl SweepTable {
    /// `(l, lambda_m(l))` for every grid point where the m-th eigenvalue exists.
    pub fn trajectory(&self, m: usize) -> Vec<(f64, f64)> {
        self.l_values
            .iter()
            .zip(&self.rows)
            .filter_map(|(&l, row)| row.iter().find(|p| p.m == m).map(|p| (l, p.lambda)))
            .collect()
    }

    pub fn max_index(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|p| p.m))
            .max()
            .unwrap_or(0)
    }
}

pub fn sweep_over_l(d: f64, l_grid: &[f64], n_modes: usize, tol: f64) -> Result<SweepTable> {
    if l_grid.is_empty() {
        return domain("empty l grid");
    }
    if l_grid.iter().any(|&l| !(l > 0.0)) || l_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("l grid must be positive and strictly increasing");
    }
    let g = Geometry::new(d, l_grid[0])?;
    let basis = ModeBasis::new(&g, n_modes)?;
    let opts = SolveOptions::with_tol(tol);
    let solve = |&l: &f64| discrete_spectrum_with(&basis, l, &opts);

    #[cfg(feature = "parallel")]
    let results: Vec<Result<DiscreteSpectrum>> = {
        use rayon::prelude::*;
        l_grid.par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<DiscreteSpectrum>> = l_grid.iter().map(solve).collect();

    let mut table = SweepTable {
        d,
        l_values: l_grid.to_vec(),
        rows: Vec::with_capacity(l_grid.len()),
        counts: Vec::with_capacity(l_grid.len()),
        warnings: Vec::new(),
    };
    for (res, &l) in results.into_iter().zip(l_grid) {
        match res {
            Ok(s) => {
                table.counts.push(s.points.len());
                table.rows.push(s.points);
                table.warnings.extend(s.warnings);
            }
            Err(e) => {
                table.counts.push(0);
                table.rows.push(Vec::new());
                table.warnings.push(SolveWarning {
                    l,
                    m: 0,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(table)
}

/// Weights `w` with `sum w = 1` and `sum w h^p = 0` for `p = 1..len-1`:
/// the polynomial extrapolation of values at steps `h` to `h = 0`.
pub fn extrapolation_weights(h: &[f64]) -> Result<Vec<f64>> {
    let n = h.len();
    if n == 0 {
        return domain("no levels to extrapolate");
    }
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut wi = 1.0;
        for j in 0..n {
            if i != j {
                if h[i] == h[j] {
                    return domain("extrapolation levels must be distinct");
                }
                wi *= h[j] / (h[j] - h[i]);
            }
        }
        w.push(wi);
    }
    Ok(w)
}

/// Eigenvalue extrapolated to `N -> infinity` in powers of `1/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolatedPoint {
    pub m: usize,
    pub parity: Parity,
    pub lambda: f64,
    pub levels: Vec<usize>,
    pub raw: Vec<f64>,
    /// Difference to the extrapolation that drops the coarsest level.
    pub spread: f64,
}

pub fn extrapolated_spectrum(g: &Geometry, levels: &[usize], tol: f64) -> Result<Vec<ExtrapolatedPoint>> {
    if levels.len() < 2 {
        return domain("extrapolation needs at least two truncation levels");
    }
    let spectra = levels
        .iter()
        .map(|&n| discrete_spectrum(g, n, tol))
        .collect::<Result<Vec<_>>>()?;
    let finest = spectra.last().expect("levels non-empty");
    let h: Vec<f64> = levels.iter().map(|&n| 1.0 / n as f64).collect();
    let w = extrapolation_weights(&h)?;
    let w_fine = extrapolation_weights(&h[1..])?;
    let mut out = Vec::new();
    for p in &finest.points {
        let raw: Option<Vec<f64>> = spectra
            .iter()
            .map(|s| s.points.iter().find(|q| q.m == p.m).map(|q| q.lambda))
            .collect();
        let Some(raw) = raw else { continue };
        let lambda: f64 = w.iter().zip(&raw).map(|(a, b)| a * b).sum();
        let fine: f64 = w_fine.iter().zip(&raw[1..]).map(|(a, b)| a * b).sum();
        out.push(ExtrapolatedPoint {
            m: p.m,
            parity: p.parity,
            lambda,
            levels: levels.to_vec(),
            raw,
            spread: (lambda - fine).abs(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_reproduce_known_formulas() {
        let w = extrapolation_weights(&[1.0, 0.5]).unwrap();
        assert_relative_eq!(w[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(w[1], 2.0, epsilon = 1e-14);
        let w = extrapolation_weights(&[1.0, 0.5, 0.25]).unwrap();
        assert_relative_eq!(w[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(w[1], -2.0, epsilon = 1e-14);
        assert_relative_eq!(w[2], 8.0 / 3.0, epsilon = 1e-14);
        assert!(extrapolation_weights(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(sweep_over_l(1.0, &[], 10, 1e-10).is_err());
        assert!(sweep_over_l(1.0, &[2.0, 1.0], 10, 1e-10).is_err());
        assert!(sweep_over_l(1.0, &[0.0, 1.0], 10, 1e-10).is_err());
    }
}
