//! Transverse sine bases of the three cross-sections and their overlaps.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// Cross-section `(0, pi)`.
    UpperStrip,
    /// Cross-section `(-d, 0)`.
    LowerStrip,
    /// Cross-section `(-d, pi)`, only meaningful above the window.
    FullStrip,
}

impl Region {
    pub fn cross_section(&self, g: &Geometry) -> (f64, f64) {
        match self {
            Region::UpperStrip => (0.0, PI),
            Region::LowerStrip => (-g.d(), 0.0),
            Region::FullStrip => (-g.d(), PI),
        }
    }
}

/// One normalized Dirichlet sine mode of a cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseMode {
    pub region: Region,
    pub j: usize,
    pub transverse_eigenvalue: f64,
    pub normalization: f64,
    wavenumber: f64,
    lo: f64,
    hi: f64,
}

impl TransverseMode {
    pub fn new(region: Region, j: usize, g: &Geometry) -> Result<Self> {
        if j == 0 {
            return domain("transverse mode index starts at 1");
        }
        let jf = j as f64;
        let (lo, hi) = region.cross_section(g);
        let wavenumber = match region {
            Region::UpperStrip => jf,
            Region::LowerStrip => PI * jf / g.d(),
            Region::FullStrip => jf * g.kappa(),
        };
        Ok(Self {
            region,
            j,
            transverse_eigenvalue: wavenumber * wavenumber,
            normalization: (2.0 / (hi - lo)).sqrt(),
            wavenumber,
            lo,
            hi,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn cross_section(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Evaluation without the range check, for hot loops.
    pub(crate) fn value_unchecked(&self, x2: f64) -> f64 {
        let arg = match self.region {
            Region::FullStrip => self.wavenumber * (x2 - PI),
            _ => self.wavenumber * x2,
        };
        self.normalization * arg.sin()
    }
}

pub fn mode_value(mode: &TransverseMode, x2: f64) -> Result<f64> {
    if !(mode.lo..=mode.hi).contains(&x2) {
        return domain(format!(
            "x2 = {x2} outside the cross-section [{}, {}]",
            mode.lo, mode.hi
        ));
    }
    Ok(mode.value_unchecked(x2))
}

/// Upper and lower strips: `sqrt(transverse eigenvalue - lambda)`.
/// Full strip: the signed quantity `j^2 kappa^2 - lambda`.
pub fn longitudinal_rate(region: Region, j: usize, lambda: f64, g: &Geometry) -> Result<f64> {
    let mode = TransverseMode::new(region, j, g)?;
    let gap = mode.transverse_eigenvalue - lambda;
    match region {
        Region::FullStrip => Ok(gap),
        _ if gap < 0.0 => domain(format!(
            "lambda = {lambda} exceeds the {:?} threshold {} of mode {j}",
            region, mode.transverse_eigenvalue
        )),
        _ => Ok(gap.sqrt()),
    }
}

/// `int_a^b cos(w x - phase) dx`, written through sinc so that it stays
/// accurate as `w -> 0`.
fn cos_integral(w: f64, phase: f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let center = w * 0.5 * (a + b) - phase;
    if w.abs() < 1e-9 {
        return (b - a) * center.cos();
    }
    let t = w * half;
    (b - a) * center.cos() * (t.sin() / t)
}

/// `int_a^b sin(alpha (x - pi)) sin(beta x) dx`.
pub(crate) fn sine_product_integral(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    let phase = alpha * PI;
    0.5 * (cos_integral(alpha - beta, phase, a, b) - cos_integral(alpha + beta, phase, a, b))
}

fn overlap(g: &Geometry, i: usize, j: usize, region: Region) -> Result<f64> {
    let full = TransverseMode::new(Region::FullStrip, i, g)?;
    let outer = TransverseMode::new(region, j, g)?;
    let (a, b) = outer.cross_section();
    Ok(full.normalization
        * outer.normalization
        * sine_product_integral(full.wavenumber, outer.wavenumber, a, b))
}

/// `int_0^pi X_i chi_j^+ dx2` with `X_i` the full-strip and `chi_j^+` the
/// upper-strip mode.
pub fn overlap_upper(g: &Geometry, i: usize, j: usize) -> Result<f64> {
    overlap(g, i, j, Region::UpperStrip)
}

/// `int_{-d}^0 X_i chi_j^- dx2`.
pub fn overlap_lower(g: &Geometry, i: usize, j: usize) -> Result<f64> {
    overlap(g, i, j, Region::LowerStrip)
}
