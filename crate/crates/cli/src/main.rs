mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use strip_spectrum::oracle::{oracle_extrapolated, suggested_truncation};
use strip_spectrum::verify::{auto_coarse_mesh, emergence_run, run_suite, Suite, VerifyConfig};
use strip_spectrum::{bracket_for, critical_lengths, discrete_spectrum, sweep_over_l, Geometry, SpectralPoint};

use config::{parse_grid, parse_width, FileConfig, Format, RunConfig, SuiteName};
use output::{emit, float, json_bytes, Table};

const THREADS_VAR: &str = "STRIP_SPECTRUM_THREADS";

const SPECTRUM_COLUMNS: [&str; 10] = [
    "d", "l", "m", "parity", "lambda", "k", "bracket_lo", "bracket_hi", "residual", "n_modes",
];

#[derive(Parser)]
#[command(name = "strip-spectrum", version, about = "Bound states of two strips coupled through a window")]
struct Cli {
    /// Flat TOML file with any of the run keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Lower strip width in (0, pi]; accepts `pi`, `pi/2`, `0.5*pi`.
    #[arg(long)]
    d: Option<String>,
    /// Modes kept above the window.
    #[arg(long)]
    n_modes: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues below the threshold for one window.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        l: Option<f64>,
    },
    /// Eigenvalues over a grid of window lengths.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `start:stop:step` or a comma list.
        #[arg(long)]
        l_grid: Option<String>,
    },
    /// Window lengths at which eigenvalues leave the threshold.
    Critical {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Solver eigenvalue against `1 - mu^2 (l - l_n)^2` just past `l_n`.
    Emerge {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        /// Comma list of offsets `l - l_n`.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Finite-difference eigenvalues with mesh extrapolation.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        l: Option<f64>,
        /// Coarsest mesh size; chosen from a size budget when absent.
        #[arg(long)]
        oracle_h: Option<f64>,
        /// Truncation half-length; `l + 10/k` when absent.
        #[arg(long = "oracle-r")]
        oracle_r: Option<f64>,
    },
    /// Runs the check suite and writes JSON reports.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Option<SuiteName>,
    },
}

/// Failure before any computation: bad flags, config or inputs.
struct ConfigError(anyhow::Error);

fn merge(file: FileConfig, common: &Common) -> Result<RunConfig> {
    let d = match (&common.d, &file.d) {
        (Some(s), _) => parse_width(s)?,
        (None, Some(w)) => w.value()?,
        (None, None) => bail!("missing lower strip width: pass --d or set d in the config file"),
    };
    Geometry::new(d, 0.0).map_err(|e| anyhow!("{e}"))?;
    let n_modes = common.n_modes.or(file.n_modes).unwrap_or(60);
    if n_modes < 2 {
        bail!("n_modes = {n_modes}: at least two modes are needed");
    }
    let tol = common.tol.or(file.tol).unwrap_or(1e-10);
    if !(tol > 0.0) {
        bail!("tol = {tol} must be positive");
    }
    Ok(RunConfig {
        d,
        l: file.l,
        l_grid: file.l_grid.map(|g| g.values()).transpose()?,
        n_modes,
        tol,
        oracle_h: file.oracle_h,
        oracle_r: file.oracle_r,
        output_path: common.output.clone().or(file.output_path),
        format: common.format.or(file.format).unwrap_or(Format::Csv),
        n_max: file.n_max.unwrap_or(3),
        n: file.n.unwrap_or(2),
        eps: file.eps.unwrap_or_else(|| vec![0.1, 0.05, 0.025, 0.0125]),
        suite: file.suite.unwrap_or(SuiteName::Default),
    })
}

fn spectrum_row(d: f64, l: f64, p: &SpectralPoint, n_modes: usize) -> Vec<String> {
    vec![
        float(d),
        float(l),
        p.m.to_string(),
        p.parity.as_str().to_string(),
        float(p.lambda),
        float(p.k),
        float(p.bracket.lower),
        float(p.bracket.upper),
        float(p.residual),
        n_modes.to_string(),
    ]
}

fn warn(messages: &[String]) -> u8 {
    for m in messages {
        eprintln!("warning: {m}");
    }
    if messages.is_empty() {
        0
    } else {
        2
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<u8> {
    let l = cfg.require_l()?;
    let g = Geometry::new(cfg.d, l)?;
    let s = discrete_spectrum(&g, cfg.n_modes, cfg.tol)?;
    let mut t = Table::new(&SPECTRUM_COLUMNS);
    for p in &s.points {
        t.push(spectrum_row(cfg.d, l, p, cfg.n_modes));
    }
    emit(&t.render(cfg.format)?, cfg.output_path.as_deref())?;
    let msgs: Vec<String> = s.warnings.iter().map(|w| format!("l = {}, m = {}: {}", w.l, w.m, w.message)).collect();
    Ok(warn(&msgs))
}

fn cmd_sweep(cfg: &RunConfig) -> Result<u8> {
    let grid = cfg.require_grid()?;
    let table = sweep_over_l(cfg.d, &grid, cfg.n_modes, cfg.tol)?;
    let mut t = Table::new(&SPECTRUM_COLUMNS);
    for (&l, row) in table.l_values.iter().zip(&table.rows) {
        for p in row {
            t.push(spectrum_row(cfg.d, l, p, cfg.n_modes));
        }
    }
    emit(&t.render(cfg.format)?, cfg.output_path.as_deref())?;
    let msgs: Vec<String> = table
        .warnings
        .iter()
        .map(|w| format!("l = {}, m = {}: {}", w.l, w.m, w.message))
        .collect();
    Ok(warn(&msgs))
}

fn cmd_critical(cfg: &RunConfig) -> Result<u8> {
    if cfg.n_max == 0 {
        bail!("n_max must be at least 1");
    }
    let c = critical_lengths(cfg.d, cfg.n_max, cfg.n_modes, cfg.tol)?;
    let mut t = Table::new(&["d", "n", "l_n", "n_modes"]);
    for (i, l) in c.iter().enumerate() {
        t.push(vec![float(cfg.d), (i + 1).to_string(), float(*l), cfg.n_modes.to_string()]);
    }
    emit(&t.render(cfg.format)?, cfg.output_path.as_deref())?;
    Ok(0)
}

fn verify_config(cfg: &RunConfig) -> VerifyConfig {
    VerifyConfig {
        n_modes: cfg.n_modes,
        tol: cfg.tol,
        emergence_ladder: cfg.eps.clone(),
        ..VerifyConfig::default()
    }
}

fn cmd_emerge(cfg: &RunConfig) -> Result<u8> {
    if cfg.n < 2 {
        bail!("n = {}: emergence is defined for n >= 2 (l_1 = 0)", cfg.n);
    }
    if cfg.eps.is_empty() || cfg.eps.iter().any(|&e| !(e > 0.0)) {
        bail!("eps offsets must be positive");
    }
    let run = emergence_run(cfg.d, cfg.n, &cfg.eps, &verify_config(cfg))?;
    let mut t = Table::new(&["d", "n", "l_n", "eps", "l", "lambda_solver", "lambda_predicted", "mu_n"]);
    for ((e, lam), pred) in run.eps.iter().zip(&run.lambda).zip(&run.predicted) {
        t.push(vec![
            float(cfg.d),
            cfg.n.to_string(),
            float(run.l_n),
            float(*e),
            float(run.l_n + e),
            float(*lam),
            float(*pred),
            float(run.mu),
        ]);
    }
    emit(&t.render(cfg.format)?, cfg.output_path.as_deref())?;
    Ok(0)
}

fn cmd_oracle(cfg: &RunConfig) -> Result<u8> {
    let l = cfg.require_l()?;
    let g = Geometry::new(cfg.d, l)?;
    let mm = discrete_spectrum(&g, cfg.n_modes, cfg.tol)?;
    if mm.points.is_empty() {
        bail!("mode matching found no eigenvalue to size the oracle run");
    }
    let k_min = mm.points.iter().map(|p| p.k).fold(f64::INFINITY, f64::min);
    let r = cfg.oracle_r.unwrap_or_else(|| suggested_truncation(l, k_min));
    let h = match cfg.oracle_h {
        Some(h) => h,
        None => auto_coarse_mesh(&g, r, VerifyConfig::default().oracle_budget)?,
    };
    let est = oracle_extrapolated(&g, r, h, mm.points.len())?;
    let mut header = SPECTRUM_COLUMNS.to_vec();
    header.extend([
        "h_coarse",
        "h1_fine",
        "h2_fine",
        "r",
        "unknowns_fine",
        "lambda_h",
        "lambda_h2",
        "lambda_h4",
        "lambda_quadratic",
        "lambda_linear",
        "spread",
    ]);
    let mut t = Table::new(&header);
    let fine = &est.levels[2];
    for (i, lam) in est.mixed.iter().enumerate() {
        let m = i + 1;
        let b = bracket_for(&g, m)?;
        let mut row = vec![
            float(cfg.d),
            float(l),
            m.to_string(),
            est.parity[i].as_str().to_string(),
            float(*lam),
            float((1.0 - lam).max(0.0).sqrt()),
            float(b.lower),
            float(b.upper),
            float(fine.eigenvalues[i].residual),
            "0".to_string(),
        ];
        row.extend([
            float(est.levels[0].h2),
            float(fine.h1),
            float(fine.h2),
            float(fine.r),
            fine.unknowns.to_string(),
        ]);
        row.extend(est.levels.iter().map(|lv| float(lv.eigenvalues[i].lambda)));
        row.extend([float(est.quadratic[i]), float(est.linear[i]), float(est.spread[i])]);
        t.push(row);
    }
    emit(&t.render(cfg.format)?, cfg.output_path.as_deref())?;
    let mut msgs = Vec::new();
    if est.mixed.len() < mm.points.len() {
        msgs.push(format!(
            "finite differences resolved {} of {} eigenvalues",
            est.mixed.len(),
            mm.points.len()
        ));
    }
    Ok(warn(&msgs))
}

fn cmd_verify(cfg: &RunConfig) -> Result<u8> {
    let suite = match cfg.suite {
        SuiteName::Default => Suite::Default,
        SuiteName::Full => Suite::Full,
    };
    let reports = run_suite(cfg.d, suite, &verify_config(cfg))?;
    let bytes = json_bytes(&reports)?;
    match &cfg.output_path {
        Some(p) => {
            emit(&bytes, Some(p))?;
            for r in &reports {
                println!("{}", r.summary());
            }
        }
        None => {
            emit(&bytes, None)?;
            for r in &reports {
                eprintln!("{}", r.summary());
            }
        }
    }
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 2 })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow!("{THREADS_VAR} = {v:?} must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn apply_flags(command: &Command, cfg: &mut RunConfig) -> Result<()> {
    match command {
        Command::Spectrum { l, .. } => cfg.l = l.or(cfg.l),
        Command::Sweep { l_grid, .. } => {
            if let Some(s) = l_grid {
                cfg.l_grid = Some(parse_grid(s)?);
            }
        }
        Command::Critical { n_max, .. } => cfg.n_max = n_max.unwrap_or(cfg.n_max),
        Command::Emerge { n, eps, .. } => {
            cfg.n = n.unwrap_or(cfg.n);
            if let Some(s) = eps {
                cfg.eps = parse_grid(s)?;
            }
        }
        Command::Oracle { l, oracle_h, oracle_r, .. } => {
            cfg.l = l.or(cfg.l);
            cfg.oracle_h = oracle_h.or(cfg.oracle_h);
            cfg.oracle_r = oracle_r.or(cfg.oracle_r);
        }
        Command::Verify { suite, .. } => cfg.suite = suite.unwrap_or(cfg.suite),
    }
    Ok(())
}

fn prepare(cli: Cli) -> std::result::Result<(Command, RunConfig), ConfigError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p).map_err(ConfigError)?,
        None => FileConfig::default(),
    };
    configure_threads().map_err(ConfigError)?;
    let common = match &cli.command {
        Command::Spectrum { common, .. }
        | Command::Sweep { common, .. }
        | Command::Critical { common, .. }
        | Command::Emerge { common, .. }
        | Command::Oracle { common, .. }
        | Command::Verify { common, .. } => common.clone(),
    };
    let mut cfg = merge(file, &common).map_err(ConfigError)?;
    apply_flags(&cli.command, &mut cfg).map_err(ConfigError)?;
    match &cli.command {
        Command::Spectrum { .. } | Command::Oracle { .. } => {
            cfg.require_l().map_err(ConfigError)?;
        }
        Command::Sweep { .. } => {
            cfg.require_grid().map_err(ConfigError)?;
        }
        _ => {}
    }
    Ok((cli.command, cfg))
}

fn run(command: &Command, cfg: &RunConfig) -> Result<u8> {
    match command {
        Command::Spectrum { .. } => cmd_spectrum(cfg),
        Command::Sweep { .. } => cmd_sweep(cfg),
        Command::Critical { .. } => cmd_critical(cfg),
        Command::Emerge { .. } => cmd_emerge(cfg),
        Command::Oracle { .. } => cmd_oracle(cfg),
        Command::Verify { .. } => cmd_verify(cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, cfg) = match prepare(cli) {
        Ok(v) => v,
        Err(ConfigError(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match run(&command, &cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::Width;
    use std::f64::consts::PI;

    #[test]
    fn flags_override_file() {
        let file = FileConfig {
            d: Some(Width::Text("pi/2".into())),
            n_modes: Some(30),
            ..FileConfig::default()
        };
        let common = Common {
            n_modes: Some(50),
            ..Common::default()
        };
        let cfg = merge(file, &common).unwrap();
        assert_eq!(cfg.d, PI / 2.0);
        assert_eq!(cfg.n_modes, 50);
        assert_eq!(cfg.tol, 1e-10);
    }

    #[test]
    fn rejects_wide_lower_strip() {
        let common = Common {
            d: Some("4".into()),
            ..Common::default()
        };
        assert!(merge(FileConfig::default(), &common).is_err());
    }
}
