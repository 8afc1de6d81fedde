//! Sweep harness: config files, figure presets, CSV/JSON output and the
//! `catswap` command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error as NumError;
use crate::fock_oracle::{oracle_run_es, OracleConfig};
use crate::metrics::{bell_state, fidelity, quadrature_distribution, BellSign};
use crate::protocol::{
    distance_for_t, run_es_averaged, run_es_fixed, transmission_to_db, GaussianLossSpec,
    HeraldedOutcome, HomodyneSpec, Peak, ProtocolParams, ALPHA_MAX,
};
use crate::quadrature::QuadratureNodes;

pub const CSV_HEADER: &str = "alpha,T,Upsilon,dx,peak,F_plus,F_minus,p_vacuum,p_homodyne";
pub const THREADS_ENV: &str = "CATSWAP_THREADS";
/// Fibre attenuation of ultra-low-loss silica, dB/km.
pub const DEFAULT_ATTENUATION: f64 = 0.149;
pub const REPORT_THRESHOLDS: [f64; 3] = [0.80, 0.70, 0.60];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("{}{key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Range {
        line: Option<usize>,
        key: String,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("oracle disagreement: {0}")]
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(NumError::InvalidParameter { .. }) => 2,
            CliError::Numeric(_) | CliError::OracleMismatch(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A rectangular parameter grid. Field names double as config keys.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_steps: usize,
    /// Transmissions of the propagating modes.
    pub T: Vec<f64>,
    /// Widths of the averaged loss mismatch; empty means no mismatch.
    pub Upsilon: Vec<f64>,
    /// Homodyne window widths; empty means ideal homodyne.
    pub dx: Vec<f64>,
    pub peak: Peak,
    /// Destination file; stdout when absent.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Compute `F_plus`/`F_minus`; otherwise those columns are `NA`.
    pub fidelity: bool,
    /// Gauss–Legendre nodes per homodyne window.
    pub nodes: usize,
    /// Gauss–Legendre nodes over the mismatch ensemble.
    pub upsilon_nodes: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            alpha_min: 0.0,
            alpha_max: 4.0,
            alpha_steps: 161,
            T: vec![1.0],
            Upsilon: Vec::new(),
            dx: Vec::new(),
            peak: Peak::Plus,
            output: None,
            format: OutputFormat::Csv,
            fidelity: true,
            nodes: 32,
            upsilon_nodes: 32,
        }
    }
}

fn range(key: &str, line: Option<usize>, message: String) -> ConfigError {
    ConfigError::Range {
        line,
        key: key.to_string(),
        message,
    }
}

fn check_t(t: f64, line: Option<usize>) -> Result<(), ConfigError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(range("T", line, format!("{t} not in (0, 1]")));
    }
    Ok(())
}

fn check_alpha(key: &str, a: f64, line: Option<usize>) -> Result<(), ConfigError> {
    if !(0.0..=ALPHA_MAX).contains(&a) {
        return Err(range(key, line, format!("{a} not in [0, {ALPHA_MAX}]")));
    }
    Ok(())
}

impl SweepSpec {
    /// α values, evenly spaced and including both ends.
    pub fn alphas(&self) -> Vec<f64> {
        let n = self.alpha_steps;
        let h = (self.alpha_max - self.alpha_min) / (n - 1) as f64;
        (0..n).map(|i| self.alpha_min + i as f64 * h).collect()
    }

    /// Applies one `key=value` pair with per-key range checks.
    pub fn set(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        let syntax = |message: String| match line {
            Some(line) => ConfigError::Syntax { line, message },
            None => range(key, None, message),
        };
        let num = |v: &str| -> Result<f64, ConfigError> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| syntax(format!("{key}: '{}' is not a number", v.trim())))
        };
        let count = |v: &str| -> Result<usize, ConfigError> {
            v.trim()
                .parse::<usize>()
                .map_err(|_| syntax(format!("{key}: '{}' is not a count", v.trim())))
        };
        let list = |v: &str| -> Result<Vec<f64>, ConfigError> {
            v.split(',')
                .filter(|s| !s.trim().is_empty())
                .map(num)
                .collect()
        };
        match key {
            "alpha_min" => {
                self.alpha_min = num(value)?;
                check_alpha(key, self.alpha_min, line)?;
            }
            "alpha_max" => {
                self.alpha_max = num(value)?;
                check_alpha(key, self.alpha_max, line)?;
            }
            "alpha_steps" => {
                self.alpha_steps = count(value)?;
                if self.alpha_steps < 2 {
                    return Err(range(key, line, "needs at least 2 steps".into()));
                }
            }
            "T" => {
                self.T = list(value)?;
                for &t in &self.T {
                    check_t(t, line)?;
                }
            }
            "Upsilon" => {
                self.Upsilon = list(value)?;
                if let Some(u) = self.Upsilon.iter().find(|u| !(**u >= 0.0 && **u <= 1.0)) {
                    return Err(range(key, line, format!("{u} not in [0, 1]")));
                }
            }
            "dx" => {
                self.dx = list(value)?;
                if let Some(d) = self.dx.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                    return Err(range(key, line, format!("{d} must be > 0")));
                }
            }
            "peak" => self.peak = value.trim().parse().map_err(syntax)?,
            "output" => {
                let v = value.trim();
                self.output = (!v.is_empty()).then(|| PathBuf::from(v));
            }
            "format" => {
                self.format = OutputFormat::from_str(value.trim(), true)
                    .map_err(|_| syntax(format!("format: '{}' (csv, json)", value.trim())))?
            }
            "fidelity" => {
                self.fidelity = value
                    .trim()
                    .parse()
                    .map_err(|_| syntax(format!("fidelity: '{}' (true, false)", value.trim())))?
            }
            "nodes" => {
                self.nodes = count(value)?;
                if !(QuadratureNodes::MIN..=QuadratureNodes::MAX).contains(&self.nodes) {
                    return Err(range(key, line, format!("{} not in [2, 4096]", self.nodes)));
                }
            }
            "upsilon_nodes" => {
                self.upsilon_nodes = count(value)?;
                if !(8..=QuadratureNodes::MAX).contains(&self.upsilon_nodes) {
                    return Err(range(
                        key,
                        line,
                        format!("{} not in [8, 4096]", self.upsilon_nodes),
                    ));
                }
            }
            _ => {
                return Err(match line {
                    Some(line) => ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    },
                    None => range(key, None, "unknown key".into()),
                })
            }
        }
        Ok(())
    }

    /// Cross-field checks on a fully assembled spec.
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_alpha("alpha_min", self.alpha_min, None)?;
        check_alpha("alpha_max", self.alpha_max, None)?;
        if self.alpha_min > self.alpha_max {
            return Err(range(
                "alpha_min",
                None,
                format!("{} exceeds alpha_max = {}", self.alpha_min, self.alpha_max),
            ));
        }
        if self.alpha_steps < 2 {
            return Err(range("alpha_steps", None, "needs at least 2 steps".into()));
        }
        if self.T.is_empty() {
            return Err(range("T", None, "empty list".into()));
        }
        for &t in &self.T {
            check_t(t, None)?;
            if let Some(u) = self.Upsilon.iter().find(|&&u| u > t) {
                return Err(range("Upsilon", None, format!("{u} exceeds T = {t}")));
            }
        }
        if let Some(u) = self.Upsilon.iter().find(|&&u| u > 0.0 && u <= 1e-4) {
            return Err(range("Upsilon", None, format!("{u} must be 0 or > 1e-4")));
        }
        Ok(())
    }
}

/// Reads a flat `key=value` file; `#` starts a comment.
pub fn load_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SweepSpec, ConfigError> {
    let mut spec = SweepSpec::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                message: format!("expected key=value, got '{line}'"),
            });
        };
        spec.set(key.trim(), value, Some(i + 1))?;
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "Upsilon")]
    pub upsilon: Option<f64>,
    pub dx: Option<f64>,
    pub peak: Peak,
    #[serde(rename = "F_plus")]
    pub f_plus: Option<f64>,
    #[serde(rename = "F_minus")]
    pub f_minus: Option<f64>,
    pub p_vacuum: f64,
    pub p_homodyne: Option<f64>,
}

/// Round-trip float formatting (17 significant digits).
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_else(|| "NA".into())
}

impl Row {
    pub fn to_csv(&self) -> String {
        [
            fmt_value(self.alpha),
            fmt_value(self.t),
            fmt_opt(self.upsilon),
            fmt_opt(self.dx),
            self.peak.to_string(),
            fmt_opt(self.f_plus),
            fmt_opt(self.f_minus),
            fmt_value(self.p_vacuum),
            fmt_opt(self.p_homodyne),
        ]
        .join(",")
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[Row]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Thread pool sized by `CATSWAP_THREADS` when set.
fn pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}

fn evaluate(
    spec: &SweepSpec,
    alpha: f64,
    t: f64,
    upsilon: Option<f64>,
    dx: Option<f64>,
) -> Result<Row, NumError> {
    let homodyne = dx.map_or(HomodyneSpec::Ideal, |dx| HomodyneSpec::Banded { dx });
    let params = ProtocolParams::new(alpha, t)
        .with_peak(spec.peak)
        .with_homodyne(homodyne)
        .with_nodes(QuadratureNodes::gauss_legendre(spec.nodes)?);
    let out: HeraldedOutcome = match upsilon {
        Some(w) if w > 0.0 => {
            run_es_averaged(&params, &GaussianLossSpec::new(w, spec.upsilon_nodes, t))?
        }
        _ => run_es_fixed(&params)?,
    };
    out.validate()?;
    let (f_plus, f_minus) = if spec.fidelity {
        (
            Some(fidelity(&out.rho, &bell_state(alpha, BellSign::Plus))?),
            Some(fidelity(&out.rho, &bell_state(alpha, BellSign::Minus))?),
        )
    } else {
        (None, None)
    };
    Ok(Row {
        alpha,
        t,
        upsilon,
        dx,
        peak: spec.peak,
        f_plus,
        f_minus,
        p_vacuum: out.p_vacuum,
        p_homodyne: out.p_homodyne,
    })
}

/// One row per grid point, ordered by (alpha, T, Upsilon, dx).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<Row>, CliError> {
    spec.validate()?;
    let ups: Vec<Option<f64>> = if spec.Upsilon.is_empty() {
        vec![None]
    } else {
        spec.Upsilon.iter().copied().map(Some).collect()
    };
    let dxs: Vec<Option<f64>> = if spec.dx.is_empty() {
        vec![None]
    } else {
        spec.dx.iter().copied().map(Some).collect()
    };
    let mut grid = Vec::new();
    for a in spec.alphas() {
        for &t in &spec.T {
            for &u in &ups {
                for &d in &dxs {
                    grid.push((a, t, u, d));
                }
            }
        }
    }
    let rows = pool().install(|| {
        grid.par_iter()
            .map(|&(a, t, u, d)| evaluate(spec, a, t, u, d))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(rows)
}

/// Renders rows in `spec.format` and writes them to `spec.output` or stdout.
pub fn write_rows(spec: &SweepSpec, rows: &[Row]) -> Result<(), CliError> {
    let text = match spec.format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => to_json(rows),
    };
    match &spec.output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
pub enum FigureId {
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11ProbDist,
    Fig12,
    FigHomSuccess,
}

/// Frozen inputs of a figure dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FigurePreset {
    Sweep(SweepSpec),
    Distribution {
        alphas: Vec<f64>,
        t: f64,
        x_min: f64,
        x_max: f64,
        x_steps: usize,
    },
}

fn line_sweep(alpha_max: f64, t: Vec<f64>) -> SweepSpec {
    SweepSpec {
        alpha_min: 0.0,
        alpha_max,
        alpha_steps: (alpha_max / 0.025).round() as usize + 1,
        T: t,
        ..SweepSpec::default()
    }
}

const EQUAL_LOSS_T: [f64; 6] = [1.00, 0.99, 0.98, 0.97, 0.96, 0.95];
const BANDWIDTHS: [f64; 4] = [0.01, 0.25, 0.5, 1.0];

impl FigureId {
    pub fn stem(self) -> &'static str {
        match self {
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
            FigureId::Fig11ProbDist => "fig11_prob_dist",
            FigureId::Fig12 => "fig12",
            FigureId::FigHomSuccess => "fig_hom_success",
        }
    }

    pub fn preset(self) -> FigurePreset {
        let sweep = match self {
            FigureId::Fig6 => line_sweep(4.0, EQUAL_LOSS_T.to_vec()),
            FigureId::Fig7 => SweepSpec {
                Upsilon: vec![0.01, 0.05, 0.10],
                ..line_sweep(4.0, vec![1.00, 0.97, 0.95])
            },
            FigureId::Fig8 => SweepSpec {
                alpha_steps: 41,
                // the ensemble degenerates at Υ = 0, so the grid starts one step in
                Upsilon: (1..=41).map(|i| 0.1 * i as f64 / 41.0).collect(),
                ..line_sweep(4.0, vec![1.0])
            },
            FigureId::Fig9 => SweepSpec {
                dx: BANDWIDTHS.to_vec(),
                ..line_sweep(4.0, vec![1.0])
            },
            FigureId::Fig10 => SweepSpec {
                dx: BANDWIDTHS.to_vec(),
                ..line_sweep(4.0, vec![0.95])
            },
            FigureId::Fig11ProbDist => {
                return FigurePreset::Distribution {
                    alphas: vec![0.0, 1.0, 2.0],
                    t: 1.0,
                    x_min: -4.0,
                    x_max: 4.0,
                    x_steps: 801,
                }
            }
            FigureId::Fig12 => SweepSpec {
                fidelity: false,
                ..line_sweep(2.5, EQUAL_LOSS_T.to_vec())
            },
            FigureId::FigHomSuccess => SweepSpec {
                dx: vec![0.01, 0.25, 0.5, 1.0, 5.0],
                peak: Peak::Both,
                fidelity: false,
                ..line_sweep(4.0, vec![1.0])
            },
        };
        FigurePreset::Sweep(sweep)
    }
}

/// Density curves, one column per α, as CSV.
pub fn distribution_csv(alphas: &[f64], t: f64, xs: &[f64]) -> Result<String, NumError> {
    let cols = alphas
        .iter()
        .map(|&a| quadrature_distribution(&ProtocolParams::new(a, t), xs))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = String::from("x");
    for a in alphas {
        write!(out, ",f_alpha_{a}").unwrap();
    }
    out.push('\n');
    for (i, x) in xs.iter().enumerate() {
        out.push_str(&fmt_value(*x));
        for c in &cols {
            out.push(',');
            out.push_str(&fmt_value(c[i].1));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct FigureMeta<'a> {
    figure: &'a str,
    version: &'a str,
    wall_time_s: f64,
    rows: usize,
    preset: &'a FigurePreset,
}

/// Writes `<fig>.csv` and `<fig>.meta.json` into `outdir`.
pub fn reproduce_figure(fig: FigureId, outdir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let start = Instant::now();
    let preset = fig.preset();
    let (csv, rows) = match &preset {
        FigurePreset::Sweep(spec) => {
            let rows = run_sweep(spec)?;
            (to_csv(&rows), rows.len())
        }
        FigurePreset::Distribution {
            alphas,
            t,
            x_min,
            x_max,
            x_steps,
        } => {
            let h = (x_max - x_min) / (*x_steps - 1) as f64;
            let xs: Vec<f64> = (0..*x_steps).map(|i| x_min + i as f64 * h).collect();
            (distribution_csv(alphas, *t, &xs)?, xs.len())
        }
    };
    fs::create_dir_all(outdir)?;
    let csv_path = outdir.join(format!("{}.csv", fig.stem()));
    fs::write(&csv_path, csv)?;
    let meta = FigureMeta {
        figure: fig.stem(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: start.elapsed().as_secs_f64(),
        rows,
        preset: &preset,
    };
    let meta_path = outdir.join(format!("{}.meta.json", fig.stem()));
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n",
    )?;
    Ok(vec![csv_path, meta_path])
}

/// Best Φ⁺ fidelity over α ∈ (0, 4] at equal loss `t`, ideal homodyne.
pub fn peak_fidelity(t: f64) -> Result<(f64, f64), NumError> {
    let f = |a: f64| -> Result<f64, NumError> {
        let out = run_es_fixed(&ProtocolParams::new(a, t))?;
        fidelity(&out.rho, &bell_state(a, BellSign::Plus))
    };
    let step = 0.025;
    let mut best = (step, f(step)?);
    for i in 2..=160 {
        let a = i as f64 * step;
        let v = f(a)?;
        if v > best.1 {
            best = (a, v);
        }
    }
    // golden-section refinement inside the bracketing grid cell pair
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = ((best.0 - step).max(step), (best.0 + step).min(4.0));
    for _ in 0..40 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(x1)? > f(x2)? {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let a = 0.5 * (lo + hi);
    let v = f(a)?;
    Ok(if v > best.1 { (a, v) } else { best })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub threshold: f64,
    /// Lowest equal-loss transmission whose peak fidelity reaches the threshold.
    pub t: f64,
    pub loss_db: f64,
    /// Alice–Bob separation with the measurement station at the midpoint.
    pub separation_km: f64,
    pub peak_alpha: f64,
}

pub fn distance_report(threshold: f64, atten_db_per_km: f64) -> Result<DistanceRow, NumError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(crate::error::invalid(
            "threshold",
            format!("{threshold} not in (0, 1)"),
        ));
    }
    if !(atten_db_per_km > 0.0) {
        return Err(crate::error::invalid(
            "atten",
            format!("{atten_db_per_km} must be > 0"),
        ));
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    if peak_fidelity(lo)?.1 >= threshold {
        return Err(crate::error::invalid(
            "threshold",
            format!("{threshold} reached for every T >= 0.5"),
        ));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if peak_fidelity(mid)?.1 >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DistanceRow {
        threshold,
        t: hi,
        loss_db: transmission_to_db(hi),
        separation_km: 2.0 * distance_for_t(hi, atten_db_per_km),
        peak_alpha: peak_fidelity(hi)?.0,
    })
}

pub fn distance_table(atten_db_per_km: f64) -> Result<Vec<DistanceRow>, NumError> {
    REPORT_THRESHOLDS
        .par_iter()
        .map(|&f| distance_report(f, atten_db_per_km))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub alpha: f64,
    pub t: f64,
    pub upsilon: f64,
    pub dx: Option<f64>,
    pub trace_distance: f64,
    pub p_vacuum_diff: f64,
}

/// Analytic vs Fock-oracle comparison on the standard agreement grid.
pub fn oracle_check(cfg: &OracleConfig) -> Result<Vec<OracleCheck>, NumError> {
    let mut grid = Vec::new();
    for alpha in [0.5, 1.0, 2.0] {
        for t in [1.0, 0.95, 0.9] {
            for upsilon in [0.0, 0.05] {
                for dx in [None, Some(0.5)] {
                    grid.push((alpha, t, upsilon, dx));
                }
            }
        }
    }
    pool().install(|| {
        grid.par_iter()
            .map(|&(alpha, t, upsilon, dx)| {
                let homodyne = dx.map_or(HomodyneSpec::Ideal, |dx| HomodyneSpec::Banded { dx });
                let p = ProtocolParams::new(alpha, t)
                    .with_upsilon(upsilon)
                    .with_homodyne(homodyne);
                let analytic = run_es_fixed(&p)?;
                let oracle = oracle_run_es(&p, cfg)?;
                Ok(OracleCheck {
                    alpha,
                    t,
                    upsilon,
                    dx,
                    trace_distance: analytic.rho.trace_distance(&oracle.rho),
                    p_vacuum_diff: (analytic.p_vacuum - oracle.p_vacuum).abs(),
                })
            })
            .collect()
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "catswap",
    version,
    about = "Cat-state hybrid entanglement swapping simulator"
)]
pub struct Cli {
    /// key=value file with sweep settings; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a parameter grid
    Sweep(SweepArgs),
    /// Regenerate a figure dataset
    Figure {
        id: FigureId,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
    },
    /// Tolerated transmission and Alice-Bob separation per fidelity threshold
    DistanceReport {
        #[arg(long, default_value_t = DEFAULT_ATTENUATION)]
        atten: f64,
        /// Single threshold instead of 0.80, 0.70, 0.60
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Compare the analytic engine with the Fock-space oracle
    OracleCheck {
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
}

#[allow(non_snake_case)]
#[derive(Debug, Default, clap::Args)]
pub struct SweepArgs {
    /// [default: 0]
    #[arg(long = "alpha_min", alias = "alpha-min")]
    pub alpha_min: Option<String>,
    /// [default: 4]
    #[arg(long = "alpha_max", alias = "alpha-max")]
    pub alpha_max: Option<String>,
    /// [default: 161]
    #[arg(long = "alpha_steps", alias = "alpha-steps")]
    pub alpha_steps: Option<String>,
    /// Comma-separated transmissions [default: 1]
    #[arg(long = "T")]
    pub T: Option<String>,
    /// Comma-separated mismatch widths; 0 means none [default: empty]
    #[arg(long = "Upsilon")]
    pub Upsilon: Option<String>,
    /// Comma-separated homodyne windows [default: empty, ideal homodyne]
    #[arg(long)]
    pub dx: Option<String>,
    /// plus, minus or both [default: plus]
    #[arg(long)]
    pub peak: Option<String>,
    /// Output file [default: stdout]
    #[arg(long)]
    pub output: Option<String>,
    /// csv or json [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    /// true or false [default: true]
    #[arg(long)]
    pub fidelity: Option<String>,
    /// Nodes per homodyne window [default: 32]
    #[arg(long)]
    pub nodes: Option<String>,
    /// Nodes over the mismatch ensemble [default: 32]
    #[arg(long = "upsilon_nodes", alias = "upsilon-nodes")]
    pub upsilon_nodes: Option<String>,
}

impl SweepArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("alpha_min", &self.alpha_min),
            ("alpha_max", &self.alpha_max),
            ("alpha_steps", &self.alpha_steps),
            ("T", &self.T),
            ("Upsilon", &self.Upsilon),
            ("dx", &self.dx),
            ("peak", &self.peak),
            ("output", &self.output),
            ("format", &self.format),
            ("fidelity", &self.fidelity),
            ("nodes", &self.nodes),
            ("upsilon_nodes", &self.upsilon_nodes),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }
}

/// Config file first, then command-line flags on top.
pub fn resolve_spec(config: Option<&Path>, args: &SweepArgs) -> Result<SweepSpec, ConfigError> {
    let mut spec = match config {
        Some(p) => load_config(p)?,
        None => SweepSpec::default(),
    };
    for (k, v) in args.overrides() {
        spec.set(k, v, None)?;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(args) => {
            let spec = resolve_spec(cli.config.as_deref(), args)?;
            let rows = run_sweep(&spec)?;
            write_rows(&spec, &rows)
        }
        Command::Figure { id, outdir } => {
            for p in reproduce_figure(*id, outdir)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::DistanceReport { atten, threshold } => {
            let rows = match threshold {
                Some(th) => vec![distance_report(*th, *atten)?],
                None => distance_table(*atten)?,
            };
            println!("threshold,T,loss_dB,separation_km,peak_alpha");
            for r in rows {
                println!(
                    "{:.2},{:.4},{:.3},{:.2},{:.3}",
                    r.threshold, r.t, r.loss_db, r.separation_km, r.peak_alpha
                );
            }
            Ok(())
        }
        Command::OracleCheck { n_max, tolerance } => {
            let cfg = OracleConfig {
                n_max: *n_max,
                ..OracleConfig::default()
            };
            let checks = oracle_check(&cfg)?;
            println!("alpha,T,upsilon,dx,trace_distance,p_vacuum_diff");
            for c in &checks {
                println!(
                    "{},{},{},{},{:e},{:e}",
                    c.alpha,
                    c.t,
                    c.upsilon,
                    c.dx.map_or("ideal".into(), |d| d.to_string()),
                    c.trace_distance,
                    c.p_vacuum_diff
                );
            }
            let worst = checks.iter().map(|c| c.trace_distance).fold(0.0, f64::max);
            if worst > *tolerance {
                return Err(CliError::OracleMismatch(format!(
                    "max trace distance {worst:e}"
                )));
            }
            Ok(())
        }
    }
}

/// Parses `std::env::args`, runs, and maps failures to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
