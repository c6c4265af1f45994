//! Command-line interface.
//!
//! Subcommands: `prices`, `simulate`, `fit`, `impact`, `microprice`,
//! `stats`. Every command is deterministic given `--seed` and its inputs.
//! Exit codes: 0 success, 2 configuration/usage, 3 input parse, 4 numeric,
//! 1 anything else. With `--json-errors` failures are printed to stderr as
//! one JSON object.

use crate::batch::{
    batch_run_paired_parallel, batch_run_parallel, sampling_batch_parallel, SamplingExperiment,
};
use crate::config::{ConfigError, ExperimentConfig};
use crate::format::{fmt_sig, round_sig};
use crate::ingest::{
    apply_session_filter, bin_last_quote, derive_series, parse_quote_csv_path, DerivedSeries,
    DropReport, FilterPolicy, IngestError,
};
use crate::output;
use boltzprice_core::impact::impact_curve;
use boltzprice_core::microprice::{
    estimate_microprice, microprice_series, simulate_toy_large_tick, Discretization, QuoteSeries,
    ToyModelConfig,
};
use boltzprice_core::stochastics::{
    fit_beta_mom, fit_gamma_mom, gaussian_kde, silverman_bandwidth, DistributionSpec, RngSpec,
    SummaryStats,
};
use chrono::NaiveTime;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, invalid parameters. Exit 2.
    Config(String),
    /// Malformed input data. Exit 3.
    Parse(String),
    /// Statistical/numeric failure (infeasible fit, missing state, NaN). Exit 4.
    Numeric(String),
    /// IO and everything else. Exit 1.
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Parse(_) => "parse",
            CliError::Numeric(_) => "numeric",
            CliError::Other(_) => "other",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Parse(m) | CliError::Numeric(m) | CliError::Other(m) => m,
        }
    }
}

impl From<boltzprice_core::Error> for CliError {
    fn from(e: boltzprice_core::Error) -> Self {
        use boltzprice_core::Error::*;
        match e {
            InvalidInput(_) => CliError::Config(e.to_string()),
            FitInfeasible(_) | UndefinedStatistic(_) | InfeasibleDrift { .. }
            | NumericFailure(_) | MissingData(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io(_) => CliError::Other(e.to_string()),
            IngestError::Header { .. } | IngestError::Rows(_) => CliError::Parse(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(_) => CliError::Other(e.to_string()),
            ConfigError::Toml(_) | ConfigError::Invalid(_) => CliError::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "boltzprice",
    version,
    about = "Maximum-entropy order-book prices, imbalance-driven price simulation, market impact, and micro-price estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed override for anything random.
    #[arg(long, global = true, env = "BOLTZPRICE_SEED")]
    seed: Option<u64>,

    /// Worker threads for batch runs (default: sequential).
    #[arg(long, global = true, env = "BOLTZPRICE_THREADS")]
    threads: Option<usize>,

    /// Write primary output here instead of stdout.
    #[arg(long, global = true, env = "BOLTZPRICE_OUT")]
    out: Option<PathBuf>,

    /// Primary output format where both make sense.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Report failures as structured JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
}

#[derive(Debug, Args)]
struct IngestOpts {
    /// Session start (HH:MM), in each timestamp's own zone offset.
    #[arg(long, default_value = "09:30", value_parser = parse_time)]
    session_start: NaiveTime,

    /// Session end (HH:MM).
    #[arg(long, default_value = "16:00", value_parser = parse_time)]
    session_end: NaiveTime,

    /// Minutes trimmed from both session ends.
    #[arg(long, default_value_t = 4)]
    trim_minutes: u32,

    /// Bin width in seconds (last quote per bin wins).
    #[arg(long, default_value_t = 60)]
    bin_seconds: i64,

    /// Keep locked (bid == ask) quotes instead of dropping them.
    #[arg(long)]
    keep_locked: bool,

    /// Keep mid changes that span day boundaries.
    #[arg(long)]
    keep_overnight_changes: bool,
}

impl IngestOpts {
    fn policy(&self) -> FilterPolicy {
        FilterPolicy {
            session_start: self.session_start,
            session_end: self.session_end,
            trim_minutes: self.trim_minutes,
            drop_locked: !self.keep_locked,
            drop_first_bin_change: !self.keep_overnight_changes,
        }
    }

    fn load(&self, input: &Path) -> Result<(DerivedSeries, DropReport), CliError> {
        if self.bin_seconds <= 0 {
            return Err(CliError::Config(format!(
                "bin width must be positive, got {}",
                self.bin_seconds
            )));
        }
        let records = parse_quote_csv_path(input)?;
        let bins = bin_last_quote(&records, self.bin_seconds);
        let filtered = apply_session_filter(&bins, &self.policy());
        Ok((derive_series(&filtered), filtered.report))
    }
}

fn parse_time(s: &str) -> Result<NaiveTime, String> {
    NaiveTime::parse_from_str(s, "%H:%M")
        .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M:%S"))
        .map_err(|e| format!("bad time `{s}`: {e}"))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive the price-family series from a quote CSV.
    Prices {
        /// Quote CSV (timestamp,bid_price,ask_price,bid_size,ask_size).
        #[arg(long)]
        input: PathBuf,

        /// Extra Boltzmann price columns at these beta values.
        #[arg(long = "beta", value_delimiter = ',')]
        betas: Vec<f64>,

        /// Write the drop report (JSON) here.
        #[arg(long)]
        drop_report: Option<PathBuf>,

        #[command(flatten)]
        ingest: IngestOpts,
    },

    /// Batch Monte Carlo from an experiment config.
    Simulate {
        /// Experiment TOML (see the shipped configs/ directory).
        #[arg(long)]
        config: PathBuf,

        /// Override the config's run count.
        #[arg(long)]
        runs: Option<usize>,

        /// Override the step count (SDE experiments).
        #[arg(long)]
        steps: Option<usize>,

        /// Override the model beta.
        #[arg(long)]
        beta: Option<f64>,

        /// Override the model sigma.
        #[arg(long)]
        sigma: Option<f64>,

        /// Override the model eta.
        #[arg(long)]
        eta: Option<f64>,

        /// Override the time step.
        #[arg(long)]
        dt: Option<f64>,

        /// Also write the primary model's per-run statistics CSV here.
        #[arg(long)]
        runs_csv: Option<PathBuf>,

        /// Also write run 0's full path (SDE experiments only).
        #[arg(long)]
        path_csv: Option<PathBuf>,
    },

    /// Method-of-moments distribution fit for a series column.
    Fit {
        /// Series CSV (e.g. the `prices` output).
        #[arg(long)]
        input: PathBuf,

        /// Distribution family.
        #[arg(long, value_enum)]
        dist: FitDist,

        /// Column to fit; defaults to `theta` (beta, shifted by +1/2)
        /// or `spread` (gamma).
        #[arg(long)]
        column: Option<String>,
    },

    /// Theoretical impact curve at fixed spread and beta.
    Impact {
        /// Experiment TOML with an [impact] section.
        #[arg(long)]
        config: Option<PathBuf>,

        #[arg(long)]
        spread: Option<f64>,

        #[arg(long)]
        beta: Option<f64>,

        #[arg(long, default_value_t = -0.5)]
        theta_min: f64,

        #[arg(long, default_value_t = 0.5)]
        theta_max: f64,

        #[arg(long, default_value_t = 101)]
        grid_points: usize,
    },

    /// Micro-price table from quote data or the large-tick toy model.
    Microprice {
        /// Quote CSV input.
        #[arg(long, conflicts_with = "toy")]
        input: Option<PathBuf>,

        /// Run the toy model with this alpha instead of reading data.
        #[arg(long)]
        toy: Option<f64>,

        /// Toy model boundary events.
        #[arg(long, default_value_t = 200_000)]
        events: usize,

        /// Toy model restart perturbation.
        #[arg(long, default_value_t = 0.49)]
        epsilon: f64,

        /// Tick size.
        #[arg(long, default_value_t = 0.01)]
        tick: f64,

        /// Imbalance buckets.
        #[arg(long, default_value_t = 10)]
        buckets: usize,

        /// Recursion iterations.
        #[arg(long, default_value_t = 6)]
        iterations: usize,

        /// Spread states as tick multiples.
        #[arg(long = "spread-states", value_delimiter = ',', default_values_t = [1u32])]
        spread_states: Vec<u32>,

        /// Write the adjustment table CSV here (default: primary output).
        #[arg(long)]
        table_out: Option<PathBuf>,

        /// Also write the per-observation micro-price series CSV here.
        #[arg(long)]
        series_out: Option<PathBuf>,

        #[command(flatten)]
        ingest: IngestOpts,
    },

    /// Summary statistics (and optional KDE) for a series column.
    Stats {
        #[arg(long)]
        input: PathBuf,

        /// Column to summarize.
        #[arg(long, default_value = "value")]
        column: String,

        /// Write a KDE CSV evaluated on an automatic grid.
        #[arg(long)]
        kde_out: Option<PathBuf>,

        #[arg(long, default_value_t = 512)]
        kde_points: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitDist {
    Beta,
    Gamma,
}

impl Cli {
    pub fn json_errors(&self) -> bool {
        self.json_errors
    }

    pub fn run(self) -> Result<(), CliError> {
        let Cli {
            command,
            seed,
            threads,
            out,
            format,
            ..
        } = self;
        match command {
            Command::Prices {
                input,
                betas,
                drop_report,
                ingest,
            } => cmd_prices(&input, &betas, drop_report, ingest, &out, format),
            Command::Simulate {
                config,
                runs,
                steps,
                beta,
                sigma,
                eta,
                dt,
                runs_csv,
                path_csv,
            } => cmd_simulate(
                &config,
                SimulateOverrides {
                    seed,
                    runs,
                    steps,
                    beta,
                    sigma,
                    eta,
                    dt,
                },
                threads,
                runs_csv,
                path_csv,
                &out,
                format,
            ),
            Command::Fit {
                input,
                dist,
                column,
            } => cmd_fit(&input, dist, column, &out, format),
            Command::Impact {
                config,
                spread,
                beta,
                theta_min,
                theta_max,
                grid_points,
            } => cmd_impact(
                config, spread, beta, theta_min, theta_max, grid_points, &out, format,
            ),
            Command::Microprice {
                input,
                toy,
                events,
                epsilon,
                tick,
                buckets,
                iterations,
                spread_states,
                table_out,
                series_out,
                ingest,
            } => cmd_microprice(MicropriceArgs {
                input,
                toy,
                events,
                epsilon,
                tick,
                buckets,
                iterations,
                spread_states,
                table_out,
                series_out,
                ingest,
                seed,
                out,
                format,
            }),
            Command::Stats {
                input,
                column,
                kde_out,
                kde_points,
            } => cmd_stats(&input, &column, kde_out, kde_points, &out, format),
        }
    }
}

/// Writes `content` to `--out` or stdout.
fn emit(out: &Option<PathBuf>, content: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => io::stdout().write_all(content)?,
    }
    Ok(())
}

fn emit_json(out: &Option<PathBuf>, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    emit(out, text.as_bytes())
}

/// Re-encodes one of our CSV outputs as JSON (`--format json` on tabular
/// commands): numeric cells become numbers, everything else strings.
fn csv_to_json(csv: &str) -> Value {
    let mut lines = csv.lines();
    let columns: Vec<Value> = lines
        .next()
        .unwrap_or_default()
        .split(',')
        .map(|c| Value::String(c.to_string()))
        .collect();
    let rows: Vec<Value> = lines
        .map(|line| {
            Value::Array(
                line.split(',')
                    .map(|cell| match cell.parse::<f64>() {
                        Ok(x) if cell != "NA" => json!(x),
                        _ => Value::String(cell.to_string()),
                    })
                    .collect(),
            )
        })
        .collect();
    json!({ "columns": columns, "rows": rows })
}

fn emit_table(
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
    csv: String,
) -> Result<(), CliError> {
    match format {
        Some(OutputFormat::Json) => emit_json(out, &csv_to_json(&csv)),
        _ => emit(out, csv.as_bytes()),
    }
}

fn cmd_prices(
    input: &Path,
    betas: &[f64],
    drop_report: Option<PathBuf>,
    ingest: IngestOpts,
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    if let Some(bad) = betas.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(CliError::Config(format!("beta must be >= 0, got {bad}")));
    }
    let (series, report) = ingest.load(input)?;
    let mut csv = Vec::new();
    output::write_prices_csv(&mut csv, &series, betas)?;
    emit_table(out, format, String::from_utf8(csv).expect("csv is utf-8"))?;
    if let Some(path) = drop_report {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Other(e.to_string()))?;
        fs::write(path, text + "\n")?;
    }
    Ok(())
}

struct SimulateOverrides {
    seed: Option<u64>,
    runs: Option<usize>,
    steps: Option<usize>,
    beta: Option<f64>,
    sigma: Option<f64>,
    eta: Option<f64>,
    dt: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    config_path: &Path,
    overrides: SimulateOverrides,
    threads: Option<usize>,
    runs_csv: Option<PathBuf>,
    path_csv: Option<PathBuf>,
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let config = ExperimentConfig::from_path(config_path)?;
    let seed = overrides.seed.unwrap_or(config.seed);
    let runs = overrides.runs.unwrap_or(config.runs);
    if runs == 0 {
        return Err(CliError::Config("runs must be >= 1".to_string()));
    }
    if path_csv.is_some() && config.sde.is_none() {
        return Err(CliError::Config(
            "--path-csv needs an [sde] experiment".to_string(),
        ));
    }
    let rng = RngSpec::new(seed, 0);

    let (model_result, paired_result) = if let Some(sde) = &config.sde {
        let steps = overrides.steps.unwrap_or(sde.steps);
        let dt = overrides.dt.or(sde.dt);
        let mut model = sde.model.clone();
        if let Some(beta) = overrides.beta {
            model.beta = beta;
        }
        if let Some(sigma) = overrides.sigma {
            model.sigma = sigma;
        }
        if let Some(eta) = overrides.eta {
            model.eta = eta;
        }
        let sim = model.to_sim_config(steps, dt, rng)?;
        if let Some(path) = &path_csv {
            let run0 = boltzprice_core::dynamics::simulate(&sim.for_run(0))?;
            let mut csv = Vec::new();
            output::write_path_csv(&mut csv, &run0)?;
            fs::write(path, csv)?;
        }
        match &sde.paired {
            Some(paired) => {
                let paired_sim = paired.to_sim_config(steps, dt, rng)?;
                let (a, b) = batch_run_paired_parallel(&sim, &paired_sim, rng, runs, threads)?;
                (a, Some(b))
            }
            None => (batch_run_parallel(&sim, runs, threads)?, None),
        }
    } else if let Some(section) = &config.sampling_const_spread {
        let experiment = SamplingExperiment::ConstSpread {
            n: section.n,
            beta: overrides.beta.unwrap_or(section.beta),
            eta: overrides.eta.unwrap_or(section.eta),
            mu_tilde: section.mu_tilde,
            sigma_tilde: section.sigma_tilde,
            imbalance: dist_from(section.imbalance.clone())?,
        };
        (sampling_batch_parallel(&experiment, rng, runs, threads)?, None)
    } else if let Some(section) = &config.sampling_varying_spread {
        let experiment = SamplingExperiment::VaryingSpread {
            n: section.n,
            beta: overrides.beta.unwrap_or(section.beta),
            eta: overrides.eta.unwrap_or(section.eta),
            imbalance: dist_from(section.imbalance.clone())?,
            spread: spread_from(section.spread.clone())?,
        };
        (sampling_batch_parallel(&experiment, rng, runs, threads)?, None)
    } else {
        return Err(CliError::Config(
            "simulate needs an [sde] or [sampling_*] section; use the impact/microprice \
             subcommands for the other experiment kinds"
                .to_string(),
        ));
    };

    if let Some(path) = &runs_csv {
        let mut csv = Vec::new();
        output::write_runs_csv(&mut csv, &model_result)?;
        fs::write(path, csv)?;
    }

    match format {
        Some(OutputFormat::Csv) => {
            let mut csv = Vec::new();
            output::write_runs_csv(&mut csv, &model_result)?;
            emit(out, &csv)
        }
        _ => {
            let mut summary = json!({
                "name": config.name,
                "seed": seed,
                "runs": runs,
                "model": output::batch_result_json(&model_result),
            });
            if let Some(paired) = paired_result {
                summary["paired"] = output::batch_result_json(&paired);
            }
            emit_json(out, &summary)
        }
    }
}

// The config module validates these; conversions only bridge the types.
fn dist_from(d: crate::config::DistConfig) -> Result<DistributionSpec, CliError> {
    let spec = match d {
        crate::config::DistConfig::Beta { alpha, beta } => DistributionSpec::Beta { alpha, beta },
        crate::config::DistConfig::Gamma { shape, scale } => {
            DistributionSpec::Gamma { shape, scale }
        }
        crate::config::DistConfig::Constant { value } => DistributionSpec::Constant { value },
        crate::config::DistConfig::Normal { mean, std_dev } => {
            DistributionSpec::Normal { mean, std_dev }
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn spread_from(
    s: crate::config::SpreadConfig,
) -> Result<boltzprice_core::dynamics::SpreadModel, CliError> {
    Ok(boltzprice_core::dynamics::SpreadModel {
        dist: dist_from(s.dist)?,
        tick: s.tick,
    })
}

/// Reads one named column from a CSV with a header line.
fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Parse(format!("{}: empty file", path.display())))?;
    let index = header
        .split(',')
        .map(str::trim)
        .position(|c| c == column)
        .ok_or_else(|| {
            CliError::Parse(format!(
                "{}: no column `{column}` in header `{header}`",
                path.display()
            ))
        })?;
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cell = line.split(',').nth(index).ok_or_else(|| {
            CliError::Parse(format!("line {}: missing column {column}", i + 2))
        })?;
        let value: f64 = cell.trim().parse().map_err(|_| {
            CliError::Parse(format!("line {}: non-numeric `{}`", i + 2, cell.trim()))
        })?;
        values.push(value);
    }
    Ok(values)
}

fn cmd_fit(
    input: &Path,
    dist: FitDist,
    column: Option<String>,
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let default_column = match dist {
        FitDist::Beta => "theta",
        FitDist::Gamma => "spread",
    };
    let column = column.unwrap_or_else(|| default_column.to_string());
    let mut values = read_column(input, &column)?;
    // The derived series stores the centered imbalance; shift it back to q.
    if dist == FitDist::Beta && column == "theta" {
        for v in &mut values {
            *v += 0.5;
        }
    }

    let sample_stats = SummaryStats::from_samples(&values)?;
    let sample_var = sample_stats.stddev * sample_stats.stddev;
    let fitted = match dist {
        FitDist::Beta => fit_beta_mom(&values)?,
        FitDist::Gamma => fit_gamma_mom(&values)?,
    };
    let params = match fitted {
        DistributionSpec::Beta { alpha, beta } => json!({
            "dist": "beta", "alpha": round_sig(alpha), "beta": round_sig(beta),
        }),
        DistributionSpec::Gamma { shape, scale } => json!({
            "dist": "gamma", "shape": round_sig(shape), "scale": round_sig(scale),
        }),
        _ => unreachable!("method-of-moments fits are beta or gamma"),
    };
    let summary = json!({
        "column": column,
        "count": sample_stats.count,
        "params": params,
        "sample_moments": {
            "mean": round_sig(sample_stats.mean),
            "variance": round_sig(sample_var),
        },
        "fitted_moments": {
            "mean": round_sig(fitted.mean()),
            "variance": round_sig(fitted.variance()),
        },
    });
    match format {
        Some(OutputFormat::Csv) => {
            let csv = match fitted {
                DistributionSpec::Beta { alpha, beta } => format!(
                    "dist,alpha,beta,sample_mean,sample_variance\nbeta,{},{},{},{}\n",
                    fmt_sig(alpha),
                    fmt_sig(beta),
                    fmt_sig(sample_stats.mean),
                    fmt_sig(sample_var)
                ),
                DistributionSpec::Gamma { shape, scale } => format!(
                    "dist,shape,scale,sample_mean,sample_variance\ngamma,{},{},{},{}\n",
                    fmt_sig(shape),
                    fmt_sig(scale),
                    fmt_sig(sample_stats.mean),
                    fmt_sig(sample_var)
                ),
                _ => unreachable!(),
            };
            emit(out, csv.as_bytes())
        }
        _ => emit_json(out, &summary),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_impact(
    config: Option<PathBuf>,
    spread: Option<f64>,
    beta: Option<f64>,
    theta_min: f64,
    theta_max: f64,
    grid_points: usize,
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let section = match config {
        Some(path) => {
            let config = ExperimentConfig::from_path(&path)?;
            config.impact.ok_or_else(|| {
                CliError::Config(format!("{}: no [impact] section", path.display()))
            })?
        }
        None => crate::config::ImpactSection {
            spread: spread.ok_or_else(|| {
                CliError::Config("impact needs --spread (or --config)".to_string())
            })?,
            beta: beta
                .ok_or_else(|| CliError::Config("impact needs --beta (or --config)".to_string()))?,
            theta_min,
            theta_max,
            grid_points,
        },
    };
    let mut section = section;
    // Direct flags win over the config file.
    if let Some(s) = spread {
        section.spread = s;
    }
    if let Some(b) = beta {
        section.beta = b;
    }
    if !(section.spread > 0.0 && section.beta >= 0.0) {
        return Err(CliError::Config(format!(
            "impact needs spread > 0 and beta >= 0, got spread={}, beta={}",
            section.spread, section.beta
        )));
    }
    let grid = section.grid()?;
    let curve = impact_curve(section.spread, section.beta, &grid);
    let mut csv = Vec::new();
    output::write_impact_csv(&mut csv, &curve)?;
    emit_table(out, format, String::from_utf8(csv).expect("csv is utf-8"))
}

struct MicropriceArgs {
    input: Option<PathBuf>,
    toy: Option<f64>,
    events: usize,
    epsilon: f64,
    tick: f64,
    buckets: usize,
    iterations: usize,
    spread_states: Vec<u32>,
    table_out: Option<PathBuf>,
    series_out: Option<PathBuf>,
    ingest: IngestOpts,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

fn cmd_microprice(args: MicropriceArgs) -> Result<(), CliError> {
    let disc = Discretization {
        imbalance_buckets: args.buckets,
        spread_states: args.spread_states.clone(),
        tick: args.tick,
        symmetrize: true,
    };
    disc.validate()?;

    let series: QuoteSeries = match (&args.input, args.toy) {
        (Some(path), None) => {
            let (derived, _) = args.ingest.load(path)?;
            derived.to_quote_series()?
        }
        (None, Some(alpha)) => {
            let toy = ToyModelConfig {
                alpha,
                epsilon_perturb: args.epsilon,
                tick: args.tick,
                events: args.events,
                rng: RngSpec::new(args.seed.unwrap_or(0), 0),
            };
            simulate_toy_large_tick(&toy)?.series
        }
        _ => {
            return Err(CliError::Config(
                "microprice needs exactly one of --input or --toy".to_string(),
            ))
        }
    };

    let table = estimate_microprice(&series, &disc, args.iterations)?;
    let mut table_csv = Vec::new();
    output::write_microprice_table_csv(&mut table_csv, &table)?;
    match &args.table_out {
        Some(path) => fs::write(path, &table_csv)?,
        None => emit_table(
            &args.out,
            args.format,
            String::from_utf8(table_csv).expect("csv is utf-8"),
        )?,
    }

    if let Some(path) = &args.series_out {
        let prices = microprice_series(&series, &table)?;
        let mut csv = Vec::new();
        output::write_microprice_series_csv(&mut csv, &series, &prices)?;
        fs::write(path, csv)?;
    }
    Ok(())
}

fn cmd_stats(
    input: &Path,
    column: &str,
    kde_out: Option<PathBuf>,
    kde_points: usize,
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
) -> Result<(), CliError> {
    let values = read_column(input, column)?;
    let stats = SummaryStats::from_samples(&values)?;
    match format {
        Some(OutputFormat::Csv) => {
            let csv = format!(
                "count,mean,stddev,min,max,excess_kurtosis\n{},{},{},{},{},{}\n",
                stats.count,
                fmt_sig(stats.mean),
                fmt_sig(stats.stddev),
                fmt_sig(stats.min),
                fmt_sig(stats.max),
                stats
                    .excess_kurtosis
                    .map(fmt_sig)
                    .unwrap_or_else(|| "NA".to_string()),
            );
            emit(out, csv.as_bytes())?;
        }
        _ => {
            let summary = json!({
                "column": column,
                "stats": output::summary_stats_json(&stats),
            });
            emit_json(out, &summary)?;
        }
    }

    if let Some(path) = kde_out {
        if kde_points < 2 {
            return Err(CliError::Config("kde needs at least 2 points".to_string()));
        }
        let h = silverman_bandwidth(&values)?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 6.0 * h;
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 6.0 * h;
        let grid: Vec<f64> = (0..kde_points)
            .map(|i| lo + (hi - lo) * i as f64 / (kde_points - 1) as f64)
            .collect();
        let density = gaussian_kde(&values, &grid)?;
        let mut csv = Vec::new();
        output::write_kde_csv(&mut csv, &grid, &density)?;
        fs::write(path, csv)?;
    }
    Ok(())
}
