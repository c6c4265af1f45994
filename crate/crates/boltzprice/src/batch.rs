//! Rayon-parallel batch Monte Carlo with thread-count-independent results.
//!
//! Each run owns the random stream `base + run index`, results are collected
//! into run order, and aggregation happens on that ordered vector — so the
//! aggregate is identical for any worker count, including the sequential
//! core implementation.

use boltzprice_core::dynamics::{
    simulate_paired, BatchResult, RunStats, SimConfig, SpreadModel,
};
use boltzprice_core::stochastics::{sample, tick_ceiling, DistributionSpec, RngSpec};
use boltzprice_core::{Error, Result};
use rayon::prelude::*;

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Parallel version of `dynamics::batch_run`.
pub fn batch_run_parallel(
    config: &SimConfig,
    runs: usize,
    threads: Option<usize>,
) -> Result<BatchResult> {
    let per_run = with_pool(threads, || {
        (0..runs as u64)
            .into_par_iter()
            .map(|r| boltzprice_core::dynamics::run_stats(config, r))
            .collect::<Result<Vec<_>>>()
    })??;
    BatchResult::from_runs(per_run)
}

/// Parallel version of `dynamics::batch_run_paired`.
pub fn batch_run_paired_parallel(
    config_a: &SimConfig,
    config_b: &SimConfig,
    shared: RngSpec,
    runs: usize,
    threads: Option<usize>,
) -> Result<(BatchResult, BatchResult)> {
    let per_run = with_pool(threads, || {
        (0..runs as u64)
            .into_par_iter()
            .map(|r| {
                let (a, b) =
                    simulate_paired(&config_a.for_run(r), &config_b.for_run(r), shared.offset(r))?;
                Ok((RunStats::from_path(&a)?, RunStats::from_path(&b)?))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let (stats_a, stats_b): (Vec<_>, Vec<_>) = per_run.into_iter().unzip();
    Ok((
        BatchResult::from_runs(stats_a)?,
        BatchResult::from_runs(stats_b)?,
    ))
}

/// A batch of sampled price-difference sequences (the historical-data
/// sampling formulas, outside the SDE discretization).
#[derive(Debug, Clone)]
pub enum SamplingExperiment {
    ConstSpread {
        n: usize,
        beta: f64,
        eta: f64,
        mu_tilde: f64,
        sigma_tilde: f64,
        imbalance: DistributionSpec,
    },
    VaryingSpread {
        n: usize,
        beta: f64,
        eta: f64,
        imbalance: DistributionSpec,
        spread: SpreadModel,
    },
}

impl SamplingExperiment {
    const LANE_NOISE: u64 = 0;
    const LANE_IMBALANCE: u64 = 1;
    const LANE_SPREAD: u64 = 2;

    /// One sampled sequence of price differences.
    pub fn run_increments(&self, rng: RngSpec) -> Result<Vec<f64>> {
        match self {
            SamplingExperiment::ConstSpread {
                n,
                beta,
                eta,
                mu_tilde,
                sigma_tilde,
                imbalance,
            } => {
                let thetas: Vec<f64> = sample(imbalance, rng.lane(Self::LANE_IMBALANCE), *n)?
                    .into_iter()
                    .map(|q| q - 0.5)
                    .collect();
                Ok(boltzprice_core::dynamics::sample_price_changes_const_spread(
                    *mu_tilde,
                    *sigma_tilde,
                    *beta,
                    *eta,
                    &thetas,
                    rng.lane(Self::LANE_NOISE),
                ))
            }
            SamplingExperiment::VaryingSpread {
                n,
                beta,
                eta,
                imbalance,
                spread,
            } => {
                let thetas: Vec<f64> = sample(imbalance, rng.lane(Self::LANE_IMBALANCE), *n)?
                    .into_iter()
                    .map(|q| q - 0.5)
                    .collect();
                let raw = sample(&spread.dist, rng.lane(Self::LANE_SPREAD), *n)?;
                let spreads = match spread.tick {
                    Some(tick) => raw
                        .into_iter()
                        .map(|s| tick_ceiling(s, tick))
                        .collect::<Result<Vec<f64>>>()?,
                    None => raw,
                };
                boltzprice_core::dynamics::sample_price_changes_varying_spread(
                    *beta,
                    *eta,
                    &spreads,
                    &thetas,
                    rng.lane(Self::LANE_NOISE),
                )
            }
        }
    }
}

/// Batch of sampling-formula runs; run `r` uses stream `base + r`.
pub fn sampling_batch_parallel(
    experiment: &SamplingExperiment,
    base: RngSpec,
    runs: usize,
    threads: Option<usize>,
) -> Result<BatchResult> {
    let per_run = with_pool(threads, || {
        (0..runs as u64)
            .into_par_iter()
            .map(|r| RunStats::from_increments(&experiment.run_increments(base.offset(r))?))
            .collect::<Result<Vec<_>>>()
    })??;
    BatchResult::from_runs(per_run)
}
