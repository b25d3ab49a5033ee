use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

/// Width of the lower strip: a number, or an expression in `pi` such as
/// `pi`, `pi/2`, `0.5*pi`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Width {
    Number(f64),
    Text(String),
}

impl Width {
    pub fn value(&self) -> Result<f64> {
        match self {
            Width::Number(v) => Ok(*v),
            Width::Text(s) => parse_width(s),
        }
    }
}

pub fn parse_width(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let number = |x: &str| x.parse::<f64>().map_err(|_| anyhow!("cannot read d = {s:?}"));
    if t == "pi" {
        return Ok(PI);
    }
    if let Some(rest) = t.strip_prefix("pi/") {
        return Ok(PI / number(rest)?);
    }
    if let Some(rest) = t.strip_suffix("*pi") {
        return Ok(number(rest)? * PI);
    }
    number(&t)
}

/// Either an explicit list or a `start:stop:step` range, both ends included.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Text(String),
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            Grid::Text(s) => parse_grid(s),
        }
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| anyhow!("cannot read grid {s:?}"));
    if parts.len() == 3 {
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            bail!("grid {s:?} needs start <= stop and a positive step");
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + h * i as f64).collect());
    }
    s.split(',').map(num).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Default,
    Full,
}

/// Contents of a `--config` file. Every key is optional; flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub d: Option<Width>,
    pub l: Option<f64>,
    pub l_grid: Option<Grid>,
    pub n_modes: Option<usize>,
    pub tol: Option<f64>,
    pub oracle_h: Option<f64>,
    #[serde(rename = "oracle_R")]
    pub oracle_r: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub n_max: Option<usize>,
    pub n: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub suite: Option<SuiteName>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Merged settings for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub d: f64,
    pub l: Option<f64>,
    pub l_grid: Option<Vec<f64>>,
    pub n_modes: usize,
    pub tol: f64,
    pub oracle_h: Option<f64>,
    pub oracle_r: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub n_max: usize,
    pub n: usize,
    pub eps: Vec<f64>,
    pub suite: SuiteName,
}

impl RunConfig {
    pub fn require_l(&self) -> Result<f64> {
        let l = self.l.ok_or_else(|| anyhow!("missing window half-length: pass --l or set l in the config file"))?;
        if l == 0.0 {
            bail!("l = 0 closes the window: the spectrum is the essential spectrum [1, inf) and the discrete spectrum is empty");
        }
        if !(l > 0.0) || !l.is_finite() {
            bail!("window half-length l = {l} must be positive");
        }
        Ok(l)
    }

    pub fn require_grid(&self) -> Result<Vec<f64>> {
        let grid = self
            .l_grid
            .clone()
            .ok_or_else(|| anyhow!("missing l grid: pass --l-grid or set l_grid in the config file"))?;
        if grid.is_empty() {
            bail!("l grid is empty");
        }
        if grid.iter().any(|&l| !(l > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
            bail!("l grid must be positive and strictly increasing");
        }
        Ok(grid)
    }
}
