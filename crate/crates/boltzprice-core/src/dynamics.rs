//! Discrete-time price-process simulators driven by volume imbalance.
//!
//! The Boltzmann dynamics discretize
//!
//! ```text
//! dP_t = sigma ( tanh(beta theta_t) dt + dW_t / cosh(beta theta_t) )
//! ```
//!
//! with Euler steps: the drift scales with `dt`, the diffusion with
//! `sqrt(dt)`, the imbalance is redrawn i.i.d. every step, and `dt` defaults
//! to `1/N`. Variants swap the volatility scale: a constant `sigma`, the
//! per-step spread times `eta` (varying-spread model), or the current price
//! (GBM form). The Bachelier baseline `dP = mu dt + sigma dW` shares the
//! same noise lane so paired comparisons consume identical Wiener
//! increments; at `beta = 0` the constant-spread model reduces to it exactly,
//! increment by increment.
//!
//! Randomness is split into per-run streams (run `r` shifts the stream index
//! by `r`) and per-role lanes (noise / imbalance / spread), which keeps batch
//! runs embarrassingly parallel with order-independent, thread-count-
//! independent aggregates.

use crate::error::{Error, Result};
use crate::math;
use crate::stochastics::{
    excess_kurtosis, sample, standard_normals, tick_ceiling, DistributionSpec, RngSpec,
    SummaryStats,
};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

const LANE_NOISE: u64 = 0;
const LANE_IMBALANCE: u64 = 1;
const LANE_SPREAD: u64 = 2;

/// First and second moments of one price step of scale `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMoments {
    /// `epsilon * tanh(beta * theta)` — expected move.
    pub drift: f64,
    /// `epsilon / cosh(beta * theta)` — standard deviation of the move.
    pub volatility: f64,
    /// Step scale; half the spread in the order-book reading.
    pub epsilon: f64,
}

/// Moments of a two-point step `±epsilon` taken with the Boltzmann
/// up-probability; satisfies `drift^2 + volatility^2 = epsilon^2`.
pub fn step_moments(epsilon: f64, beta: f64, theta: f64) -> StepMoments {
    let x = beta * theta;
    StepMoments {
        drift: epsilon * math::tanh(x),
        volatility: epsilon / math::cosh(x),
        epsilon,
    }
}

/// Which increment law a simulation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    /// `dP = mu dt + sigma dW`.
    Bachelier,
    /// `dP = sigma (tanh(beta theta) dt + dW / cosh(beta theta))`.
    BoltzmannConstSpread,
    /// `dP = eta S_t (tanh(beta theta) dt + dW / cosh(beta theta))`.
    BoltzmannVaryingSpread,
    /// `dP = sigma P_t (tanh(beta theta) dt + dW / cosh(beta theta))`.
    GbmBoltzmann,
}

impl ModelKind {
    fn draws_imbalance(&self) -> bool {
        !matches!(self, ModelKind::Bachelier)
    }
}

/// Spread sampling model for the varying-spread dynamics.
///
/// When `tick` is set, raw draws are interpreted in tick units and rounded up
/// to a whole number of ticks; when `None` the draw is used as-is.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SpreadModel {
    pub dist: DistributionSpec,
    pub tick: Option<f64>,
}

/// Full parameterization of one simulated path.
///
/// `sigma` is the volatility scale of the Bachelier, constant-spread, and GBM
/// models; `eta` scales the spread in the varying-spread model; `mu` is an
/// optional extra drift (`mu dt`, or `mu P dt` for the GBM form) and defaults
/// to zero. The imbalance model draws the bid fraction `q`; the simulator
/// centers it to `theta = q - 1/2`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SimConfig {
    pub model_kind: ModelKind,
    pub initial_price: f64,
    pub beta: f64,
    pub sigma: f64,
    pub eta: f64,
    pub mu: f64,
    pub steps: usize,
    /// Time step; defaults to `1 / steps` when `None`.
    pub dt: Option<f64>,
    pub imbalance_model: DistributionSpec,
    pub spread_model: Option<SpreadModel>,
    pub rng: RngSpec,
}

impl SimConfig {
    /// A neutral configuration: balanced imbalance, zero drift and volatility.
    pub fn new(model_kind: ModelKind, initial_price: f64, steps: usize, rng: RngSpec) -> Self {
        Self {
            model_kind,
            initial_price,
            beta: 0.0,
            sigma: 0.0,
            eta: 0.0,
            mu: 0.0,
            steps,
            dt: None,
            imbalance_model: DistributionSpec::Constant { value: 0.5 },
            spread_model: None,
            rng,
        }
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(1.0 / self.steps as f64)
    }

    /// The same configuration addressed to batch run `run`.
    pub fn for_run(&self, run: u64) -> Self {
        let mut cfg = self.clone();
        cfg.rng = cfg.rng.offset(run);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidInput(String::from("steps must be >= 1")));
        }
        if !(self.time_step().is_finite() && self.time_step() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "dt must be positive, got {}",
                self.time_step()
            )));
        }
        if !self.initial_price.is_finite() || !self.mu.is_finite() {
            return Err(Error::InvalidInput(String::from(
                "initial price and drift must be finite",
            )));
        }
        for (name, v) in [("beta", self.beta), ("sigma", self.sigma), ("eta", self.eta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.model_kind.draws_imbalance() {
            self.imbalance_model.validate()?;
        }
        if self.model_kind == ModelKind::BoltzmannVaryingSpread {
            let spread = self.spread_model.as_ref().ok_or_else(|| {
                Error::InvalidInput(String::from(
                    "varying-spread model needs a spread model",
                ))
            })?;
            spread.dist.validate()?;
            if let Some(tick) = spread.tick {
                if !(tick.is_finite() && tick > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "tick must be positive, got {tick}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A simulated path plus the sequences that produced it.
///
/// `increments[i] == prices[i + 1] - prices[i]` exactly; the audit sequences
/// (`thetas`, `spreads`, `noises`) are empty when the model does not draw
/// them.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PricePath {
    pub prices: Vec<f64>,
    pub increments: Vec<f64>,
    pub thetas: Vec<f64>,
    pub spreads: Vec<f64>,
    pub noises: Vec<f64>,
}

impl PricePath {
    pub fn terminal(&self) -> f64 {
        *self.prices.last().expect("paths have at least one price")
    }
}

/// Simulates one path under the given configuration.
pub fn simulate(config: &SimConfig) -> Result<PricePath> {
    config.validate()?;
    let noises = standard_normals(config.rng.lane(LANE_NOISE), config.steps);
    simulate_with_noise(config, noises)
}

/// Simulates two configurations over the identical Wiener increments.
///
/// The shared noise stream comes from `shared`'s noise lane; each model's
/// imbalance and spread draws still come from its own stream. The step
/// counts and time steps must agree.
pub fn simulate_paired(
    config_a: &SimConfig,
    config_b: &SimConfig,
    shared: RngSpec,
) -> Result<(PricePath, PricePath)> {
    if config_a.steps != config_b.steps || config_a.time_step() != config_b.time_step() {
        return Err(Error::InvalidInput(format!(
            "paired simulations need matching steps and dt: ({}, {}) vs ({}, {})",
            config_a.steps,
            config_a.time_step(),
            config_b.steps,
            config_b.time_step()
        )));
    }
    config_a.validate()?;
    config_b.validate()?;
    let noises = standard_normals(shared.lane(LANE_NOISE), config_a.steps);
    let path_a = simulate_with_noise(config_a, noises.clone())?;
    let path_b = simulate_with_noise(config_b, noises)?;
    Ok((path_a, path_b))
}

fn simulate_with_noise(config: &SimConfig, noises: Vec<f64>) -> Result<PricePath> {
    let steps = config.steps;
    let dt = config.time_step();
    let sqrt_dt = math::sqrt(dt);

    let thetas: Vec<f64> = if config.model_kind.draws_imbalance() {
        sample(
            &config.imbalance_model,
            config.rng.lane(LANE_IMBALANCE),
            steps,
        )?
        .into_iter()
        .map(|q| q - 0.5)
        .collect()
    } else {
        Vec::new()
    };

    let spreads: Vec<f64> = if config.model_kind == ModelKind::BoltzmannVaryingSpread {
        let model = config
            .spread_model
            .as_ref()
            .expect("validated varying-spread config has a spread model");
        let raw = sample(&model.dist, config.rng.lane(LANE_SPREAD), steps)?;
        match model.tick {
            Some(tick) => raw
                .into_iter()
                .map(|s| tick_ceiling(s, tick))
                .collect::<Result<Vec<f64>>>()?,
            None => raw,
        }
    } else {
        Vec::new()
    };

    let mut prices = Vec::with_capacity(steps + 1);
    let mut increments = Vec::with_capacity(steps);
    let mut price = config.initial_price;
    prices.push(price);

    for n in 0..steps {
        let z = noises[n];
        let increment = match config.model_kind {
            ModelKind::Bachelier => config.mu * dt + config.sigma * (sqrt_dt * z),
            ModelKind::BoltzmannConstSpread => {
                let x = config.beta * thetas[n];
                config.mu * dt + config.sigma * (math::tanh(x) * dt + (sqrt_dt * z) / math::cosh(x))
            }
            ModelKind::BoltzmannVaryingSpread => {
                let x = config.beta * thetas[n];
                config.mu * dt
                    + config.eta
                        * (spreads[n] * (math::tanh(x) * dt + (sqrt_dt * z) / math::cosh(x)))
            }
            ModelKind::GbmBoltzmann => {
                let x = config.beta * thetas[n];
                (config.mu * price) * dt
                    + config.sigma * (price * (math::tanh(x) * dt + (sqrt_dt * z) / math::cosh(x)))
            }
        };
        let next = price + increment;
        if !next.is_finite() {
            return Err(Error::NumericFailure(format!(
                "price became non-finite at step {n}"
            )));
        }
        increments.push(next - price);
        prices.push(next);
        price = next;
    }

    Ok(PricePath {
        prices,
        increments,
        thetas,
        spreads,
        noises,
    })
}

/// Biased random walk with fixed increment `epsilon` and per-step
/// up-probability `e^{beta theta} / (e^{beta theta} + e^{-beta theta})`.
///
/// Starts at zero; one step per entry of `theta_seq`. The uniform draws that
/// decided each step are retained in `noises`.
pub fn simulate_biased_walk(
    epsilon: f64,
    beta: f64,
    theta_seq: &[f64],
    rng: RngSpec,
) -> PricePath {
    let mut gen = rng.rng();
    let mut prices = Vec::with_capacity(theta_seq.len() + 1);
    let mut increments = Vec::with_capacity(theta_seq.len());
    let mut noises = Vec::with_capacity(theta_seq.len());
    let mut level = 0.0;
    prices.push(level);
    for &theta in theta_seq {
        let p_up = math::logistic(2.0 * beta * theta);
        let u: f64 = gen.gen();
        let step = if u < p_up { epsilon } else { -epsilon };
        let next = level + step;
        increments.push(next - level);
        prices.push(next);
        noises.push(u);
        level = next;
    }
    PricePath {
        prices,
        increments,
        thetas: theta_seq.to_vec(),
        spreads: Vec::new(),
        noises,
    }
}

/// Centered imbalance that reproduces drift `mu` at volatility `sigma`:
/// `theta_hat = artanh(mu / sigma) / beta`.
///
/// Values outside `[-1/2, 1/2]` mean no imbalance distribution can produce
/// the requested drift at this `beta`; callers should treat them as a
/// configuration warning.
pub fn drift_match_theta(beta: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "beta must be finite and > 0, got {beta}"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need finite mu and positive sigma, got mu={mu}, sigma={sigma}"
        )));
    }
    let ratio = mu / sigma;
    if ratio.abs() >= 1.0 {
        return Err(Error::InfeasibleDrift { mu, sigma });
    }
    Ok(math::artanh(ratio) / beta)
}

/// Beta parameters with the given mean and concentration `a + b`.
pub fn beta_params_for_mean(target_mean: f64, concentration: f64) -> Result<DistributionSpec> {
    if !(target_mean.is_finite() && target_mean > 0.0 && target_mean < 1.0) {
        return Err(Error::InvalidInput(format!(
            "target mean must lie in (0, 1), got {target_mean}"
        )));
    }
    if !(concentration.is_finite() && concentration > 0.0) {
        return Err(Error::InvalidInput(format!(
            "concentration must be positive, got {concentration}"
        )));
    }
    DistributionSpec::beta(
        target_mean * concentration,
        (1.0 - target_mean) * concentration,
    )
}

/// Constant-spread sampled price differences
/// `eta mu~ tanh(beta theta_i) + eta sigma~ eps_i / cosh(beta theta_i)`
/// with `eps_i ~ N(0, 1)` drawn from `rng`.
pub fn sample_price_changes_const_spread(
    mu_tilde: f64,
    sigma_tilde: f64,
    beta: f64,
    eta: f64,
    theta_seq: &[f64],
    rng: RngSpec,
) -> Vec<f64> {
    let eps = standard_normals(rng, theta_seq.len());
    theta_seq
        .iter()
        .zip(eps)
        .map(|(&theta, e)| {
            let x = beta * theta;
            eta * mu_tilde * math::tanh(x) + eta * sigma_tilde * (e / math::cosh(x))
        })
        .collect()
}

/// Varying-spread sampled price differences
/// `S_i tanh(beta theta_i) + eta S_i eps_i / cosh(beta theta_i)`.
pub fn sample_price_changes_varying_spread(
    beta: f64,
    eta: f64,
    spread_seq: &[f64],
    theta_seq: &[f64],
    rng: RngSpec,
) -> Result<Vec<f64>> {
    if spread_seq.len() != theta_seq.len() {
        return Err(Error::InvalidInput(format!(
            "spread and imbalance sequences must align: {} vs {}",
            spread_seq.len(),
            theta_seq.len()
        )));
    }
    let eps = standard_normals(rng, theta_seq.len());
    Ok(spread_seq
        .iter()
        .zip(theta_seq)
        .zip(eps)
        .map(|((&s, &theta), e)| {
            let x = beta * theta;
            s * math::tanh(x) + eta * s * (e / math::cosh(x))
        })
        .collect())
}

/// Per-run statistics of a simulated path's increments.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RunStats {
    pub excess_kurtosis: f64,
    pub increment_mean: f64,
    pub increment_std: f64,
    pub terminal_price: f64,
}

impl RunStats {
    pub fn from_path(path: &PricePath) -> Result<Self> {
        let stats = SummaryStats::from_samples(&path.increments)?;
        Ok(Self {
            excess_kurtosis: excess_kurtosis(&path.increments)?,
            increment_mean: stats.mean,
            increment_std: stats.stddev,
            terminal_price: path.terminal(),
        })
    }

    /// Stats for a bare increment sequence (sampling-formula runs); the
    /// terminal price is the cumulative change.
    pub fn from_increments(increments: &[f64]) -> Result<Self> {
        let stats = SummaryStats::from_samples(increments)?;
        Ok(Self {
            excess_kurtosis: excess_kurtosis(increments)?,
            increment_mean: stats.mean,
            increment_std: stats.stddev,
            terminal_price: increments.iter().sum(),
        })
    }
}

/// Aggregate statistics over a batch of runs.
///
/// Aggregation reads the per-run vector in run order, so the result does not
/// depend on completion order or thread count.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BatchResult {
    pub runs: usize,
    pub kurtosis: SummaryStats,
    pub increment_mean: SummaryStats,
    pub increment_std: SummaryStats,
    pub terminal_price: SummaryStats,
    pub per_run: Vec<RunStats>,
}

impl BatchResult {
    pub fn from_runs(per_run: Vec<RunStats>) -> Result<Self> {
        if per_run.is_empty() {
            return Err(Error::InvalidInput(String::from("batch needs >= 1 run")));
        }
        let collect = |f: fn(&RunStats) -> f64| -> Vec<f64> { per_run.iter().map(f).collect() };
        Ok(Self {
            runs: per_run.len(),
            kurtosis: SummaryStats::from_samples(&collect(|r| r.excess_kurtosis))?,
            increment_mean: SummaryStats::from_samples(&collect(|r| r.increment_mean))?,
            increment_std: SummaryStats::from_samples(&collect(|r| r.increment_std))?,
            terminal_price: SummaryStats::from_samples(&collect(|r| r.terminal_price))?,
            per_run,
        })
    }
}

/// Statistics for batch run `run` of `config`.
pub fn run_stats(config: &SimConfig, run: u64) -> Result<RunStats> {
    RunStats::from_path(&simulate(&config.for_run(run))?)
}

/// Sequential batch Monte Carlo: runs `config` with per-run streams
/// `rng.stream_index + r` and aggregates the per-run statistics.
pub fn batch_run(config: &SimConfig, runs: usize) -> Result<BatchResult> {
    let per_run = (0..runs as u64)
        .map(|r| run_stats(config, r))
        .collect::<Result<Vec<_>>>()?;
    BatchResult::from_runs(per_run)
}

/// Paired batch: both models consume identical per-run noise from `shared`.
pub fn batch_run_paired(
    config_a: &SimConfig,
    config_b: &SimConfig,
    shared: RngSpec,
    runs: usize,
) -> Result<(BatchResult, BatchResult)> {
    let mut stats_a = Vec::with_capacity(runs);
    let mut stats_b = Vec::with_capacity(runs);
    for r in 0..runs as u64 {
        let (path_a, path_b) =
            simulate_paired(&config_a.for_run(r), &config_b.for_run(r), shared.offset(r))?;
        stats_a.push(RunStats::from_path(&path_a)?);
        stats_b.push(RunStats::from_path(&path_b)?);
    }
    Ok((
        BatchResult::from_runs(stats_a)?,
        BatchResult::from_runs(stats_b)?,
    ))
}
