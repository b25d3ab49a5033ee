//! Mode-matching system at the window edge `x1 = l`.
//!
//! Above the window the field is expanded in full-strip modes `X_j` with
//! longitudinal factors `F_j` of the requested parity; for `|x1| > l` each
//! strip carries its own evanescent sine modes. Eliminating the outer
//! amplitudes through the Dirichlet-to-Neumann map of the two half-strips
//! leaves an `N x N` system `M a = 0`. Column `j` is scaled by
//! `1 / hypot(F_j(l), F_j'(l))`, so the entries stay bounded for every `l`
//! and `lambda` and the determinant has no poles.
//!
//! For `d = pi` only the full-strip modes that are even in `x2` are kept.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geometry::{bracket_for, Geometry};
use crate::linalg::{equilibrated_log_det, null_vector};
use crate::modes::{overlap_lower, overlap_upper, Region, TransverseMode};
use crate::roots::bracketed_root;
use crate::spectrum::SpectralPoint;

/// Symmetry of the field under `x1 -> -x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity carried by the m-th eigenfunction.
    pub fn for_index(m: usize) -> Parity {
        if m % 2 == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Longitudinal factor of one full-strip mode on `[-l, l]`, normalized so
/// that hyperbolic branches stay `O(1)` at the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Longitudinal {
    sigma: f64,
    rate: f64,
    parity: Parity,
    l: f64,
}

impl Longitudinal {
    pub fn new(sigma: f64, parity: Parity, l: f64) -> Self {
        Self {
            sigma,
            rate: sigma.abs().sqrt(),
            parity,
            l,
        }
    }

    /// Value and derivative for `0 <= x <= l`.
    fn eval_half(&self, x: f64) -> (f64, f64) {
        let s = self.rate;
        if self.sigma > 0.0 {
            let e = (s * (x - self.l)).exp();
            let den = 1.0 + (-2.0 * s * self.l).exp();
            let plus = 1.0 + (-2.0 * s * x).exp();
            let minus = -(-2.0 * s * x).exp_m1();
            match self.parity {
                Parity::Even => (e * plus / den, s * e * minus / den),
                Parity::Odd => (e * minus / (s * den), e * plus / den),
            }
        } else if self.sigma < 0.0 {
            let (sn, cs) = (s * x).sin_cos();
            match self.parity {
                Parity::Even => (cs, -s * sn),
                Parity::Odd => (sn / s, cs),
            }
        } else {
            match self.parity {
                Parity::Even => (1.0, 0.0),
                Parity::Odd => (x, 1.0),
            }
        }
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (f, fp) = self.eval_half(x.abs());
        if x < 0.0 {
            match self.parity {
                Parity::Even => (f, -fp),
                Parity::Odd => (-f, fp),
            }
        } else {
            (f, fp)
        }
    }

    pub fn edge(&self) -> (f64, f64) {
        let s = self.rate;
        let l = self.l;
        if self.sigma > 0.0 {
            match self.parity {
                Parity::Even => (1.0, s * (s * l).tanh()),
                Parity::Odd => ((s * l).tanh() / s, 1.0),
            }
        } else {
            self.eval_half(l)
        }
    }

    /// `int_{-l}^{l} F'(x)^2 dx`.
    pub fn derivative_energy(&self) -> f64 {
        let s = self.rate;
        let l = self.l;
        if self.sigma > 0.0 {
            let c = (s * l).cosh();
            let sech2 = 1.0 / (c * c);
            match self.parity {
                Parity::Even => s * (s * l).tanh() - s * s * l * sech2,
                Parity::Odd => (s * l).tanh() / s + l * sech2,
            }
        } else if self.sigma < 0.0 {
            match self.parity {
                Parity::Even => s * s * l - 0.5 * s * (2.0 * s * l).sin(),
                Parity::Odd => l + (2.0 * s * l).sin() / (2.0 * s),
            }
        } else {
            match self.parity {
                Parity::Even => 0.0,
                Parity::Odd => 2.0 * l,
            }
        }
    }
}

/// Truncated bases and their overlap matrices. Independent of `l` and
/// `lambda`, so one basis serves whole sweeps.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    geometry: Geometry,
    n_modes: usize,
    inner: Vec<TransverseMode>,
    upper: Vec<TransverseMode>,
    lower: Vec<TransverseMode>,
    pu: DMatrix<f64>,
    pl: DMatrix<f64>,
}

impl ModeBasis {
    pub fn new(g: &Geometry, n_modes: usize) -> Result<Self> {
        if n_modes < 2 {
            return domain(format!("mode truncation N = {n_modes} must be at least 2"));
        }
        let folded = g.is_symmetric();
        let inner_idx: Vec<usize> = if folded {
            (0..n_modes).map(|t| 2 * t + 1).collect()
        } else {
            (1..=n_modes).collect()
        };
        let n_upper = n_modes;
        let n_lower = if folded {
            n_modes
        } else {
            ((n_modes as f64 * g.d() / PI).round() as usize).max(2)
        };
        let inner = inner_idx
            .iter()
            .map(|&j| TransverseMode::new(Region::FullStrip, j, g))
            .collect::<Result<Vec<_>>>()?;
        let upper = (1..=n_upper)
            .map(|j| TransverseMode::new(Region::UpperStrip, j, g))
            .collect::<Result<Vec<_>>>()?;
        let lower = (1..=n_lower)
            .map(|j| TransverseMode::new(Region::LowerStrip, j, g))
            .collect::<Result<Vec<_>>>()?;
        let mut pu = DMatrix::zeros(n_modes, n_upper);
        let mut pl = DMatrix::zeros(n_modes, n_lower);
        for (r, &j) in inner_idx.iter().enumerate() {
            for i in 0..n_upper {
                pu[(r, i)] = overlap_upper(g, j, i + 1)?;
            }
            for i in 0..n_lower {
                pl[(r, i)] = overlap_lower(g, j, i + 1)?;
            }
        }
        Ok(Self {
            geometry: *g,
            n_modes,
            inner,
            upper,
            lower,
            pu,
            pl,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn d(&self) -> f64 {
        self.geometry.d()
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Whether the basis was restricted to fields even in `x2`.
    pub fn is_folded(&self) -> bool {
        self.geometry.is_symmetric()
    }

    pub fn inner_modes(&self) -> &[TransverseMode] {
        &self.inner
    }

    pub fn upper_modes(&self) -> &[TransverseMode] {
        &self.upper
    }

    pub fn lower_modes(&self) -> &[TransverseMode] {
        &self.lower
    }

    pub fn upper_overlaps(&self) -> &DMatrix<f64> {
        &self.pu
    }

    pub fn lower_overlaps(&self) -> &DMatrix<f64> {
        &self.pl
    }

    fn outer_rates(modes: &[TransverseMode], lambda: f64) -> Vec<f64> {
        modes
            .iter()
            .map(|m| (m.transverse_eigenvalue - lambda).max(0.0).sqrt())
            .collect()
    }

    pub(crate) fn upper_rates(&self, lambda: f64) -> Vec<f64> {
        Self::outer_rates(&self.upper, lambda)
    }

    pub(crate) fn lower_rates(&self, lambda: f64) -> Vec<f64> {
        Self::outer_rates(&self.lower, lambda)
    }

    pub(crate) fn longitudinal(&self, l: f64, lambda: f64, parity: Parity) -> Vec<Longitudinal> {
        self.inner
            .iter()
            .map(|m| Longitudinal::new(m.transverse_eigenvalue - lambda, parity, l))
            .collect()
    }

    /// Dirichlet-to-Neumann map of both half-strips in the full-strip basis.
    fn dtn(&self, lambda: f64) -> DMatrix<f64> {
        let su = DVector::from_vec(self.upper_rates(lambda));
        let sl = DVector::from_vec(self.lower_rates(lambda));
        let mut pu_s = self.pu.clone();
        for (mut col, s) in pu_s.column_iter_mut().zip(su.iter()) {
            col *= *s;
        }
        let mut pl_s = self.pl.clone();
        for (mut col, s) in pl_s.column_iter_mut().zip(sl.iter()) {
            col *= *s;
        }
        pu_s * self.pu.transpose() + pl_s * self.pl.transpose()
    }

    /// Matching matrix at window half-length `l`; `lambda` may reach the
    /// threshold 1.
    pub fn assemble(&self, l: f64, lambda: f64, parity: Parity) -> Result<MatchingMatrix> {
        let g = self.geometry.with_window(l)?;
        if !(lambda > g.kappa_sq() && lambda <= 1.0) {
            return domain(format!(
                "lambda = {lambda} outside ({}, 1]",
                g.kappa_sq()
            ));
        }
        let long = self.longitudinal(l, lambda, parity);
        let mut cos = Vec::with_capacity(self.n_modes);
        let mut sin = Vec::with_capacity(self.n_modes);
        for f in &long {
            let (v, dv) = f.edge();
            let rho = v.hypot(dv);
            cos.push(v / rho);
            sin.push(dv / rho);
        }
        let mut entries = self.dtn(lambda);
        for (c, mut col) in entries.column_iter_mut().enumerate() {
            col *= cos[c];
        }
        for c in 0..self.n_modes {
            entries[(c, c)] += sin[c];
        }
        Ok(MatchingMatrix {
            lambda,
            parity,
            n_modes: self.n_modes,
            entries,
            geometry: g,
            edge_cos: cos,
            edge_sin: sin,
        })
    }
}

/// Truncated matching system at fixed `(lambda, parity, N)`.
#[derive(Debug, Clone)]
pub struct MatchingMatrix {
    pub lambda: f64,
    pub parity: Parity,
    pub n_modes: usize,
    pub entries: DMatrix<f64>,
    pub geometry: Geometry,
    edge_cos: Vec<f64>,
    edge_sin: Vec<f64>,
}

impl MatchingMatrix {
    /// Normalized edge value and slope `(F_j(l), F_j'(l)) / hypot` per column.
    pub fn edge_factors(&self) -> (&[f64], &[f64]) {
        (&self.edge_cos, &self.edge_sin)
    }
}

/// Matching system for the eigenvalue problem, `kappa^2 < lambda < 1`.
pub fn assemble(g: &Geometry, lambda: f64, parity: Parity, n_modes: usize) -> Result<MatchingMatrix> {
    if !(lambda > g.kappa_sq() && lambda < 1.0) {
        return domain(format!(
            "lambda = {lambda} outside the discrete-spectrum interval ({}, 1)",
            g.kappa_sq()
        ));
    }
    ModeBasis::new(g, n_modes)?.assemble(g.l(), lambda, parity)
}

/// Signed, scaled determinant of a matching matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Indicator {
    /// `sign * exp(log_abs)`, with `log_abs` clamped to `[-700, 700]`.
    pub value: f64,
    pub log_abs: f64,
    pub sign: f64,
    /// A pivot vanished exactly; `value` is then 0.
    pub singular: bool,
}

pub fn indicator(m: &MatchingMatrix) -> Indicator {
    match equilibrated_log_det(&m.entries) {
        Some((sign, log_abs)) => Indicator {
            value: sign * log_abs.clamp(-700.0, 700.0).exp(),
            log_abs,
            sign,
            singular: false,
        },
        None => Indicator {
            value: 0.0,
            log_abs: f64::NEG_INFINITY,
            sign: 0.0,
            singular: true,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub tol: f64,
    /// Search in a straddling bracket stops at `1 - threshold_margin`.
    pub threshold_margin: f64,
    /// Bisection runs until the bracket is this narrow.
    pub bisect_width: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            threshold_margin: 1e-6,
            bisect_width: 1e-8,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Locates the m-th eigenvalue inside its bracket.
pub fn solve_in_bracket(g: &Geometry, m: usize, n_modes: usize, tol: f64) -> Result<SpectralPoint> {
    let basis = ModeBasis::new(g, n_modes)?;
    solve_with_basis(&basis, g.l(), m, &SolveOptions::with_tol(tol))
}

/// Same as [`solve_in_bracket`] with a precomputed basis.
pub fn solve_with_basis(basis: &ModeBasis, l: f64, m: usize, opts: &SolveOptions) -> Result<SpectralPoint> {
    if !(opts.tol > 0.0) {
        return domain("solver tolerance must be positive");
    }
    let g = basis.geometry().with_window(l)?;
    if l == 0.0 {
        return domain("l = 0: no window, the discrete spectrum below the threshold 1 is empty");
    }
    let bracket = bracket_for(&g, m)?;
    let eps = 1e-9 * bracket.width();
    let lo = bracket.lower + eps;
    let hi = (bracket.upper - eps).min(1.0 - opts.threshold_margin);
    let parity = Parity::for_index(m);
    if !(lo < hi) {
        return Err(Error::NoSignChange {
            m,
            lo,
            hi,
            trace: Vec::new(),
        });
    }

    let eval = |lambda: f64| -> Indicator {
        basis
            .assemble(l, lambda, parity)
            .map(|mm| indicator(&mm))
            .unwrap_or(Indicator {
                value: f64::NAN,
                log_abs: f64::NAN,
                sign: 0.0,
                singular: true,
            })
    };
    let mut reference: Option<f64> = None;
    let root = bracketed_root(
        |x| {
            let ind = eval(x);
            if ind.singular {
                0.0
            } else {
                ind.sign
            }
        },
        |x, a, b| {
            let r = *reference.get_or_insert_with(|| eval(a).log_abs.max(eval(b).log_abs));
            let ind = eval(x);
            ind.sign * (ind.log_abs - r).exp()
        },
        lo,
        hi,
        opts.bisect_width,
        opts.tol,
    );
    match root {
        Some(lambda) => {
            let ind = eval(lambda);
            Ok(SpectralPoint {
                m,
                lambda,
                k: (1.0 - lambda).sqrt(),
                parity,
                residual: ind.value.abs(),
                bracket,
                n_modes_used: basis.n_modes(),
            })
        }
        None => {
            let trace = (0..=8)
                .map(|t| {
                    let x = lo + (hi - lo) * t as f64 / 8.0;
                    (x, eval(x).value)
                })
                .collect();
            Err(Error::NoSignChange { m, lo, hi, trace })
        }
    }
}

/// Truncated field on the whole domain: full-strip modes above the window,
/// exponentials in the two half-strips beyond it.
#[derive(Debug, Clone)]
pub struct FieldExpansion {
    d: f64,
    l: f64,
    lambda: f64,
    parity: Parity,
    inner: Vec<TransverseMode>,
    longitudinal: Vec<Longitudinal>,
    a: Vec<f64>,
    upper: Vec<TransverseMode>,
    upper_rates: Vec<f64>,
    b: Vec<f64>,
    lower: Vec<TransverseMode>,
    lower_rates: Vec<f64>,
    c: Vec<f64>,
}

impl FieldExpansion {
    /// Builds the field from a null vector `v` of `mm` (column variables).
    pub(crate) fn from_null_vector(basis: &ModeBasis, mm: &MatchingMatrix, v: &DVector<f64>) -> Self {
        let l = mm.geometry.l();
        let longitudinal = basis.longitudinal(l, mm.lambda, mm.parity);
        let mut a = Vec::with_capacity(v.len());
        let mut edge = DVector::zeros(v.len());
        for (j, f) in longitudinal.iter().enumerate() {
            let (fl, dfl) = f.edge();
            let rho = fl.hypot(dfl);
            a.push(v[j] / rho);
            edge[j] = v[j] * mm.edge_cos[j];
        }
        let b = (basis.upper_overlaps().transpose() * &edge).iter().copied().collect();
        let c = (basis.lower_overlaps().transpose() * &edge).iter().copied().collect();
        Self {
            d: basis.d(),
            l,
            lambda: mm.lambda,
            parity: mm.parity,
            inner: basis.inner_modes().to_vec(),
            longitudinal,
            a,
            upper: basis.upper_modes().to_vec(),
            upper_rates: basis.upper_rates(mm.lambda),
            b,
            lower: basis.lower_modes().to_vec(),
            lower_rates: basis.lower_rates(mm.lambda),
            c,
        }
    }

    pub(crate) fn scale(&mut self, s: f64) {
        for v in self.a.iter_mut().chain(self.b.iter_mut()).chain(self.c.iter_mut()) {
            *v *= s;
        }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Window amplitudes, multiplying `F_j(x1) X_j(x2)`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Upper amplitudes, multiplying `exp(-s_i (|x1| - l)) chi_i^+(x2)`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Lower amplitudes, multiplying `exp(-s_i (|x1| - l)) chi_i^-(x2)`.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn upper_rates(&self) -> &[f64] {
        &self.upper_rates
    }

    pub fn lower_rates(&self) -> &[f64] {
        &self.lower_rates
    }

    fn check_point(&self, x1: f64, x2: f64) -> Result<()> {
        if !x1.is_finite() || !(x2 >= -self.d && x2 <= PI) {
            return domain(format!("point ({x1}, {x2}) lies outside the strips"));
        }
        Ok(())
    }

    /// Field value and `d/dx1`.
    pub fn value_and_dx1(&self, x1: f64, x2: f64) -> Result<(f64, f64)> {
        self.check_point(x1, x2)?;
        let ax = x1.abs();
        let reflect = if x1 < 0.0 { self.parity.sign() } else { 1.0 };
        let dsign = if x1 < 0.0 { -1.0 } else { 1.0 };
        if ax < self.l {
            let mut u = 0.0;
            let mut du = 0.0;
            for ((mode, f), a) in self.inner.iter().zip(&self.longitudinal).zip(&self.a) {
                let x = mode.value_unchecked(x2);
                let (fv, fp) = f.eval(ax);
                u += a * fv * x;
                du += a * fp * x;
            }
            return Ok((reflect * u, reflect * dsign * du));
        }
        let t = ax - self.l;
        let (modes, rates, amps) = if x2 > 0.0 {
            (&self.upper, &self.upper_rates, &self.b)
        } else if x2 < 0.0 {
            (&self.lower, &self.lower_rates, &self.c)
        } else {
            return Ok((0.0, 0.0));
        };
        let mut u = 0.0;
        let mut du = 0.0;
        for ((mode, s), amp) in modes.iter().zip(rates).zip(amps) {
            let e = amp * (-s * t).exp() * mode.value_unchecked(x2);
            u += e;
            du -= s * e;
        }
        Ok((reflect * u, reflect * dsign * du))
    }

    pub fn value(&self, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.value_and_dx1(x1, x2)?.0)
    }

    pub fn dx1(&self, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.value_and_dx1(x1, x2)?.1)
    }

    /// `int |du/dx1|^2` over the whole domain, mode by mode.
    pub fn dx1_energy(&self) -> f64 {
        let window: f64 = self
            .a
            .iter()
            .zip(&self.longitudinal)
            .map(|(a, f)| a * a * f.derivative_energy())
            .sum();
        let outer: f64 = self
            .b
            .iter()
            .zip(&self.upper_rates)
            .chain(self.c.iter().zip(&self.lower_rates))
            .map(|(b, s)| b * b * s)
            .sum();
        window + outer
    }
}

/// Eigenfunction of a located eigenvalue, normalized so that its leading
/// upper-strip term is `sqrt(2/pi) exp(-k |x1|) sin x2`.
#[derive(Debug, Clone)]
pub struct EigenfunctionExpansion {
    pub spectral: SpectralPoint,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub c_plus: f64,
    /// Smallest singular value of the matching matrix at `spectral.lambda`.
    pub null_residual: f64,
    pub field: FieldExpansion,
}

/// Residual allowance for [`eigenfunction`] relative to `||a||`: ten times
/// the default solver tolerance.
pub const NULL_RESIDUAL_LIMIT: f64 = 1e-9;

pub fn eigenfunction(g: &Geometry, sp: &SpectralPoint, n_modes: usize) -> Result<EigenfunctionExpansion> {
    let basis = ModeBasis::new(g, n_modes)?;
    eigenfunction_with_basis(&basis, g.l(), sp, NULL_RESIDUAL_LIMIT)
}

pub fn eigenfunction_with_basis(
    basis: &ModeBasis,
    l: f64,
    sp: &SpectralPoint,
    limit: f64,
) -> Result<EigenfunctionExpansion> {
    let mm = basis.assemble(l, sp.lambda, sp.parity)?;
    let (v, smin, _) = null_vector(&mm.entries)?;
    if smin > limit * v.norm() {
        return Err(Error::Residual {
            residual: smin,
            limit: limit * v.norm(),
        });
    }
    let mut field = FieldExpansion::from_null_vector(basis, &mm, &v);
    let lead = field.b[0] * (sp.k * l).exp();
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::Residual {
            residual: smin,
            limit,
        });
    }
    field.scale(1.0 / lead);
    let c_plus = (2.0 / PI).sqrt() * field.b[0] * (sp.k * l).exp();
    Ok(EigenfunctionExpansion {
        spectral: *sp,
        a: field.a.clone(),
        b: field.b.clone(),
        c: field.c.clone(),
        c_plus,
        null_residual: smin,
        field,
    })
}

pub fn evaluate_field(ef: &EigenfunctionExpansion, x1: f64, x2: f64) -> Result<f64> {
    ef.field.value(x1, x2)
}
