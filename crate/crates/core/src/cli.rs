//! Batch commands driven by JSON configs.
//!
//! Results go to `--out` (or the config's `out`, or standard output); logs and
//! human-readable tables go to standard error. Exit codes: 2 for an invalid
//! config, 3 for a domain error, 4 for an estimator failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::measure::{DiscreteMeasure, TransformValue};
use crate::montecarlo::{
    convergence_study, estimate_in, estimate_in_rank1_dirichlet, estimate_in_tilted, limit_target, tilted_proposal,
    write_convergence_csv, ConvergenceRow, McEstimate, SamplingPlan,
};
use crate::randmat::SpectrumSpec;
use crate::rate::{rate_multi, rate_single, regime, OutlierSet, RateResult, Regime, ThetaVector};
use crate::variational::{maximize_simplex, solve_rank1, AscentOptions, VariationalSolution};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "spherical", version, about = "Multiplicative spherical integrals: limits and Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate G, T and S̃ of a discrete measure.
    Transforms(RunArgs),
    /// Evaluate the rate function J for a θ vector.
    Rate(RunArgs),
    /// Solve the rank-one variational problem.
    Variational(RunArgs),
    /// Monte Carlo estimate of (1/N) log I_N against its limit.
    Mc(RunArgs),
    /// Convergence study over a list of sizes.
    Converge(RunArgs),
    /// Inverse-spectrum asymmetry report.
    Asymmetry(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (overrides the config's `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides the config's seed).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformsConfig {
    pub measure: DiscreteMeasure,
    #[serde(default)]
    pub z_grid: Vec<f64>,
    #[serde(default)]
    pub theta_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub measure: DiscreteMeasure,
    pub thetas: ThetaVector,
    /// Defaults to outliers stuck at the support edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outliers: Option<OutlierSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalConfig {
    /// Atoms with zero weight are outlier positions.
    pub measure: DiscreteMeasure,
    pub theta: f64,
    /// Whether the designated edge atom is an outlier.
    #[serde(default)]
    pub edge_weight_zero: bool,
    /// Also run the mirror-ascent solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ascent: Option<AscentOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Haar,
    Dirichlet,
    Tilted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub spectrum: SpectrumSpec,
    pub thetas: ThetaVector,
    pub sampling: SamplingPlan,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    /// Spectrum layout; its `N` is replaced by each entry of `n_list`.
    pub family: SpectrumSpec,
    pub n_list: Vec<usize>,
    pub thetas: ThetaVector,
    pub sampling: SamplingPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymmetryConfig {
    /// The spike is the largest upper outlier (or the top bulk atom if none).
    pub spectrum: SpectrumSpec,
    pub sampling: SamplingPlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalReport {
    pub closed_form: VariationalSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ascent: Option<VariationalSolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    pub lambda: f64,
    /// Monte Carlo estimate at `θ′ = (0, …, 0, 1)`.
    pub a: McEstimate,
    /// `(β/2) ∫ log x dμ`.
    pub b: f64,
    /// `(β/2) J(1, λ, μ)`.
    pub c: f64,
    /// Whether `θ = 1` lies strictly beyond `T_μ(λ)` (stuck-to-edge branch).
    pub genuine_spike: bool,
    /// `|a − b| ≤ 3σ + 0.02`.
    pub a_matches_b: bool,
    pub separation: f64,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_ESTIMATOR: i32 = 4;

impl CliError {
    fn schema(message: impl Into<String>) -> Self {
        Self { code: EXIT_SCHEMA, message: message.into() }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Self { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidMeasure(_) | Error::Domain(_) | Error::Range(_) | Error::Size(_) => {
                EXIT_DOMAIN
            }
            _ => EXIT_ESTIMATOR,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn load_config<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

/// Parses a config; validation failures inside typed fields count as schema errors.
pub fn parse_config<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::schema(format!("invalid config: {e}")))
}

fn open_output(args: &RunArgs, config_out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    match args.out.as_ref().or(config_out.as_ref()) {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            Ok(Box::new(io::BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_json<T: Serialize>(mut out: Box<dyn Write>, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError { code: 1, message: e.to_string() })?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError { code: 1, message: e.to_string() })
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Transforms(args) => cmd_transforms(&args),
        Command::Rate(args) => cmd_rate(&args),
        Command::Variational(args) => cmd_variational(&args),
        Command::Mc(args) => cmd_mc(&args),
        Command::Converge(args) => cmd_converge(&args),
        Command::Asymmetry(args) => cmd_asymmetry(&args),
    }
}

/// Rows `(quantity, argument, value)` of the transforms table.
pub fn transforms_table(cfg: &TransformsConfig) -> crate::Result<Vec<(&'static str, f64, f64)>> {
    let mut rows = Vec::new();
    let finite = |v: TransformValue| match v {
        TransformValue::Finite(x) => x,
        TransformValue::PlusInfinity => f64::INFINITY,
        TransformValue::MinusInfinity => f64::NEG_INFINITY,
    };
    for &z in &cfg.z_grid {
        rows.push(("G", z, finite(cfg.measure.stieltjes(z)?)));
    }
    for &z in &cfg.z_grid {
        rows.push(("T", z, finite(cfg.measure.t_transform(z)?)));
    }
    for &t in &cfg.theta_grid {
        rows.push(("S_tilde", t, cfg.measure.s_tilde(t)?));
    }
    Ok(rows)
}

pub fn cmd_transforms(args: &RunArgs) -> CliResult<()> {
    let cfg: TransformsConfig = load_config(&args.config)?;
    let rows = transforms_table(&cfg)?;
    let out = open_output(args, &cfg.out)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError { code: 1, message: e.to_string() };
    w.write_record(["quantity", "argument", "value"]).map_err(csv_err)?;
    for (q, arg, v) in rows {
        w.write_record([q.to_string(), arg.to_string(), v.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError { code: 1, message: e.to_string() })
}

fn regime_label(r: Regime) -> &'static str {
    match r {
        Regime::StuckToEdge => "STUCK_TO_EDGE",
        Regime::STransform => "S_TRANSFORM",
    }
}

pub fn rate_result(cfg: &RateConfig) -> crate::Result<RateResult> {
    let outliers = cfg.outliers.clone().unwrap_or_else(|| OutlierSet::at_edges(&cfg.thetas, &cfg.measure));
    rate_multi(&cfg.thetas, &outliers, &cfg.measure)
}

pub fn cmd_rate(args: &RunArgs) -> CliResult<()> {
    let cfg: RateConfig = load_config(&args.config)?;
    let result = rate_result(&cfg)?;
    let mut err = io::stderr().lock();
    let _ = writeln!(err, "{:>12} {:>12} {:>14} {:>16}", "theta", "lambda", "regime", "J");
    for c in &result.components {
        let _ = writeln!(err, "{:>12.6} {:>12.6} {:>14} {:>16.10}", c.theta, c.lambda, regime_label(c.regime), c.j_value);
    }
    let _ = writeln!(err, "{:>12} {:>12} {:>14} {:>16.10}", "total", "", "", result.total);
    write_json(open_output(args, &cfg.out)?, &result)
}

pub fn variational_report(cfg: &VariationalConfig, seed: Option<u64>) -> crate::Result<VariationalReport> {
    let closed_form = solve_rank1(cfg.theta, &cfg.measure, cfg.edge_weight_zero)?;
    let ascent = match cfg.ascent {
        Some(mut opts) => {
            if seed.is_some() {
                opts.seed = seed;
            }
            Some(maximize_simplex(cfg.theta, &cfg.measure, &opts)?)
        }
        None => None,
    };
    Ok(VariationalReport { closed_form, ascent })
}

pub fn cmd_variational(args: &RunArgs) -> CliResult<()> {
    let cfg: VariationalConfig = load_config(&args.config)?;
    let report = variational_report(&cfg, args.seed)?;
    log::info!("f = {} ({:?})", report.closed_form.f_value, report.closed_form.regime);
    write_json(open_output(args, &cfg.out)?, &report)
}

fn with_seed(plan: &SamplingPlan, seed: Option<u64>) -> SamplingPlan {
    match seed {
        Some(s) => plan.clone().with_seed(s),
        None => plan.clone(),
    }
}

/// Runs the configured estimator and compares it with the limit.
pub fn mc_row(cfg: &McConfig, seed: Option<u64>) -> crate::Result<ConvergenceRow> {
    let plan = with_seed(&cfg.sampling, seed);
    let estimate = match cfg.estimator {
        Estimator::Haar => estimate_in(&cfg.spectrum, &cfg.thetas, &plan)?,
        Estimator::Dirichlet | Estimator::Tilted => {
            if cfg.thetas.len() != 1 {
                return Err(Error::Domain("the Dirichlet estimators need a single θ".into()));
            }
            let theta = cfg.thetas.values()[0];
            if cfg.estimator == Estimator::Dirichlet {
                estimate_in_rank1_dirichlet(&cfg.spectrum, theta, &plan)?
            } else {
                let proposal = tilted_proposal(&cfg.spectrum, theta)?;
                estimate_in_tilted(&cfg.spectrum, theta, &proposal, &plan)?
            }
        }
    };
    for w in &estimate.warnings {
        log::warn!("{w}");
    }
    let j_target = limit_target(&cfg.spectrum, &cfg.thetas)?;
    let gap = estimate.log_mean_per_n - j_target;
    Ok(ConvergenceRow { n: cfg.spectrum.n, estimate, j_target, gap })
}

pub fn cmd_mc(args: &RunArgs) -> CliResult<()> {
    let cfg: McConfig = load_config(&args.config)?;
    let row = mc_row(&cfg, args.seed).map_err(CliError::from)?;
    write_convergence_csv(&[row], open_output(args, &cfg.out)?).map_err(CliError::from)
}

pub fn cmd_converge(args: &RunArgs) -> CliResult<()> {
    let cfg: ConvergeConfig = load_config(&args.config)?;
    let plan = with_seed(&cfg.sampling, args.seed);
    let rows = convergence_study(&cfg.family, &cfg.n_list, &cfg.thetas, &plan).map_err(CliError::from)?;
    for r in &rows {
        log::info!("N = {}: gap {:+.5} ± {:.5}", r.n, r.gap, r.estimate.stderr);
    }
    write_convergence_csv(&rows, open_output(args, &cfg.out)?).map_err(CliError::from)
}

pub fn asymmetry_report(cfg: &AsymmetryConfig, seed: Option<u64>) -> crate::Result<AsymmetryReport> {
    let spec = &cfg.spectrum;
    let bulk = spec.bulk.without_null_atoms();
    let lambda = spec.upper_outliers.iter().copied().fold(bulk.upper_edge(), f64::max);
    let half_beta = spec.beta.value() / 2.0;
    let mut prime = vec![0.0; spec.n];
    if let Some(last) = prime.last_mut() {
        *last = 1.0;
    }
    let a = estimate_in(spec, &ThetaVector::new(prime)?, &with_seed(&cfg.sampling, seed))?;
    let b = half_beta * bulk.log_moment();
    let c = half_beta * rate_single(1.0, lambda, &bulk)?.j_value;
    let genuine_spike = regime(1.0, lambda, &bulk)? == Regime::StuckToEdge;
    let a_matches_b = (a.log_mean_per_n - b).abs() <= 3.0 * a.stderr + 0.02;
    Ok(AsymmetryReport { lambda, a, b, c, genuine_spike, a_matches_b, separation: (b - c).abs() })
}

pub fn cmd_asymmetry(args: &RunArgs) -> CliResult<()> {
    let cfg: AsymmetryConfig = load_config(&args.config)?;
    let report = asymmetry_report(&cfg, args.seed)?;
    let mut err = io::stderr().lock();
    let _ = writeln!(err, "(a) MC at θ′ = (0,…,0,1): {:.6} ± {:.6}", report.a.log_mean_per_n, report.a.stderr);
    let _ = writeln!(err, "(b) (β/2)∫log x dμ:       {:.6}", report.b);
    let _ = writeln!(err, "(c) (β/2)J(1, λ, μ):       {:.6}", report.c);
    write_json(open_output(args, &cfg.out)?, &report)?;
    if !report.genuine_spike {
        return Err(CliError {
            code: EXIT_DOMAIN,
            message: format!("λ = {} is not a spike for θ = 1: b and c coincide and the demo is vacuous", report.lambda),
        });
    }
    Ok(())
}
