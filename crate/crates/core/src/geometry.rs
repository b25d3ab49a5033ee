//! Problem parameters and the closed-form spectral bounds.
//!
//! The upper strip has cross-section `(0, pi)`, the lower strip `(-d, 0)`,
//! and the window is the segment `|x1| < l` of the common wall `x2 = 0`.
//! With `kappa = pi / (pi + d)` the discrete eigenvalues live in
//! `(kappa^2, 1)` and the m-th one is bracketed by
//! `Lambda_m(l) = kappa^2 + pi^2 m^2 / (4 l^2)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};

/// Widths and window half-length of the coupled strips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    d: f64,
    l: f64,
    kappa: f64,
}

impl Geometry {
    pub fn new(d: f64, l: f64) -> Result<Self> {
        if !d.is_finite() || d <= 0.0 || d > PI {
            return domain(format!("lower strip width d = {d} must lie in (0, pi]"));
        }
        if !l.is_finite() || l < 0.0 {
            return domain(format!("window half-length l = {l} must be non-negative"));
        }
        Ok(Self {
            d,
            l,
            kappa: PI / (PI + d),
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa * self.kappa
    }

    /// Equal strip widths. Compared exactly: `d` is user input, and the
    /// symmetric case changes the emergence coefficient by a factor 2.
    pub fn is_symmetric(&self) -> bool {
        self.d == PI
    }

    /// Same strips, different window.
    pub fn with_window(&self, l: f64) -> Result<Self> {
        Self::new(self.d, l)
    }

    /// `sqrt(1 - kappa^2)`, the slope of the eigenvalue counting bound.
    pub fn counting_rate(&self) -> f64 {
        (1.0 - self.kappa_sq()).sqrt()
    }
}

pub fn make_geometry(d: f64, l: f64) -> Result<Geometry> {
    Geometry::new(d, l)
}

/// `Lambda_m(l)`; for `m = 0` this is `kappa^2` for every `l`.
pub fn lambda_bound(g: &Geometry, m: usize) -> Result<f64> {
    if m == 0 {
        return Ok(g.kappa_sq());
    }
    if g.l == 0.0 {
        return domain("Lambda_m with m > 0 needs a window of positive length");
    }
    let mf = m as f64;
    Ok(g.kappa_sq() + PI * PI * mf * mf / (4.0 * g.l * g.l))
}

/// Lower and upper bound on the number of discrete eigenvalues.
pub fn count_bounds(g: &Geometry) -> Result<(usize, usize)> {
    if g.l <= 0.0 {
        return domain("eigenvalue count bounds need l > 0");
    }
    let lower = (2.0 * g.l / PI * g.counting_rate()).floor() as usize;
    Ok((lower, lower + 1))
}

/// Open interval `(Lambda_{m-1}, Lambda_m)` that holds the m-th eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBracket {
    pub m: usize,
    pub lower: f64,
    pub upper: f64,
    pub is_below_threshold: bool,
}

impl SpectralBracket {
    pub fn contains_strictly(&self, lambda: f64) -> bool {
        self.lower < lambda && lambda < self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub fn bracket_for(g: &Geometry, m: usize) -> Result<SpectralBracket> {
    if m == 0 {
        return domain("eigenvalue index m starts at 1");
    }
    if g.l <= 0.0 {
        return domain("brackets need a window of positive length");
    }
    let lower = lambda_bound(g, m - 1)?;
    let upper = lambda_bound(g, m)?;
    Ok(SpectralBracket {
        m,
        lower,
        upper,
        is_below_threshold: upper < 1.0,
    })
}
