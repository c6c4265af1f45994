//! Seeded sampling, moment-based fitting, and summary statistics.
//!
//! Randomness is PCG64 behind a `(master_seed, stream_index)` addressing
//! scheme: the stream index is passed through a SplitMix64 finalizer and
//! XORed into the master seed, so distinct streams are statistically
//! independent while identical specs reproduce bit-identical draws on any
//! thread. Batch harnesses assign one stream per run.
//!
//! Distribution fitting is method-of-moments throughout: closed-form,
//! deterministic, and accurate enough for the reproduction targets. Kurtosis
//! uses the uncorrected estimator `m4 / m2^2 - 3` with central moments over
//! `n`, matching the usual Fisher-kurtosis default.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_distr::Distribution;
use rand_pcg::Pcg64;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Parameter set for one of the sampling families used by the simulators.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "dist", rename_all = "snake_case"))]
pub enum DistributionSpec {
    /// Beta(alpha, beta) on (0, 1); models the bid imbalance `q`.
    Beta { alpha: f64, beta: f64 },
    /// Gamma with shape/scale parametrization; models the spread.
    Gamma { shape: f64, scale: f64 },
    /// Degenerate point mass.
    Constant { value: f64 },
    /// Normal(mean, std_dev).
    Normal { mean: f64, std_dev: f64 },
}

impl DistributionSpec {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        let spec = Self::Beta { alpha, beta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        let spec = Self::Gamma { shape, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(value: f64) -> Result<Self> {
        let spec = Self::Constant { value };
        spec.validate()?;
        Ok(spec)
    }

    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        let spec = Self::Normal { mean, std_dev };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Beta { alpha, beta } => {
                alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0
            }
            Self::Gamma { shape, scale } => {
                shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0
            }
            Self::Constant { value } => value.is_finite(),
            Self::Normal { mean, std_dev } => {
                mean.is_finite() && std_dev.is_finite() && std_dev > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "distribution parameters out of domain: {self:?}"
            )))
        }
    }

    /// Population mean of the distribution.
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Beta { alpha, beta } => alpha / (alpha + beta),
            Self::Gamma { shape, scale } => shape * scale,
            Self::Constant { value } => value,
            Self::Normal { mean, .. } => mean,
        }
    }

    /// Population variance of the distribution.
    pub fn variance(&self) -> f64 {
        match *self {
            Self::Beta { alpha, beta } => {
                let s = alpha + beta;
                alpha * beta / (s * s * (s + 1.0))
            }
            Self::Gamma { shape, scale } => shape * scale * scale,
            Self::Constant { .. } => 0.0,
            Self::Normal { std_dev, .. } => std_dev * std_dev,
        }
    }
}

/// Address of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// SplitMix64 finalizer; decorrelates adjacent stream indices.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Same master seed, different stream.
    pub fn stream(&self, stream_index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_index,
        }
    }

    /// Shifts the stream index; batch harnesses use `offset = run index`.
    pub fn offset(&self, offset: u64) -> Self {
        self.stream(self.stream_index.wrapping_add(offset))
    }

    /// Derives a sub-stream for one of up to `8` lanes within this stream.
    ///
    /// Lane addressing is `stream * 8 + lane`, so runs addressed by
    /// consecutive stream indices never collide with each other's lanes.
    pub fn lane(&self, lane: u64) -> Self {
        debug_assert!(lane < 8);
        self.stream(self.stream_index.wrapping_mul(8).wrapping_add(lane))
    }

    /// Instantiates the PCG64 generator for this stream.
    pub fn rng(&self) -> Pcg64 {
        Pcg64::seed_from_u64(self.master_seed ^ splitmix64(self.stream_index))
    }
}

/// Draws `n` i.i.d. values from `dist`.
///
/// Identical `(dist, rng, n)` requests return bit-identical sequences.
pub fn sample(dist: &DistributionSpec, rng: RngSpec, n: usize) -> Result<Vec<f64>> {
    dist.validate()?;
    let mut gen = rng.rng();
    let mut out = Vec::with_capacity(n);
    match *dist {
        DistributionSpec::Beta { alpha, beta } => {
            let d = rand_distr::Beta::new(alpha, beta)
                .map_err(|e| Error::InvalidInput(format!("beta sampler: {e}")))?;
            out.extend((0..n).map(|_| d.sample(&mut gen)));
        }
        DistributionSpec::Gamma { shape, scale } => {
            let d = rand_distr::Gamma::new(shape, scale)
                .map_err(|e| Error::InvalidInput(format!("gamma sampler: {e}")))?;
            out.extend((0..n).map(|_| d.sample(&mut gen)));
        }
        DistributionSpec::Constant { value } => {
            out.extend(core::iter::repeat_n(value, n));
        }
        DistributionSpec::Normal { mean, std_dev } => {
            let d = rand_distr::Normal::new(mean, std_dev)
                .map_err(|e| Error::InvalidInput(format!("normal sampler: {e}")))?;
            out.extend((0..n).map(|_| d.sample(&mut gen)));
        }
    }
    Ok(out)
}

/// Draws `n` standard normal variates from the given stream.
pub fn standard_normals(rng: RngSpec, n: usize) -> Vec<f64> {
    let mut gen = rng.rng();
    (0..n)
        .map(|_| rand_distr::StandardNormal.sample(&mut gen))
        .collect()
}

fn central_moments(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for &x in samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m4 / n)
}

/// Method-of-moments Beta parameters from a mean/variance pair.
///
/// Requires `0 < mean < 1` and `0 < var < mean (1 - mean)`.
pub fn beta_from_moments(mean: f64, variance: f64) -> Result<DistributionSpec> {
    if !(mean.is_finite() && mean > 0.0 && mean < 1.0) {
        return Err(Error::FitInfeasible(format!(
            "beta fit needs mean in (0, 1), got {mean}"
        )));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::FitInfeasible(format!(
            "beta fit needs positive variance, got {variance}"
        )));
    }
    let bound = mean * (1.0 - mean);
    if variance >= bound {
        return Err(Error::FitInfeasible(format!(
            "variance {variance} too large for a Beta with mean {mean} (bound {bound})"
        )));
    }
    let common = bound / variance - 1.0;
    DistributionSpec::beta(mean * common, (1.0 - mean) * common)
}

/// Fits a Beta distribution to samples in (0, 1) by method of moments.
pub fn fit_beta_mom(samples: &[f64]) -> Result<DistributionSpec> {
    if samples.len() < 2 {
        return Err(Error::FitInfeasible(String::from(
            "beta fit needs at least 2 samples",
        )));
    }
    if samples.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::InvalidInput(String::from(
            "beta fit requires samples strictly inside (0, 1)",
        )));
    }
    let (mean, m2, _) = central_moments(samples);
    beta_from_moments(mean, m2)
}

/// Method-of-moments Gamma parameters: `shape = m^2/v`, `scale = v/m`.
pub fn gamma_from_moments(mean: f64, variance: f64) -> Result<DistributionSpec> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::FitInfeasible(format!(
            "gamma fit needs positive mean, got {mean}"
        )));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::FitInfeasible(format!(
            "gamma fit needs positive variance, got {variance}"
        )));
    }
    DistributionSpec::gamma(mean * mean / variance, variance / mean)
}

/// Fits a Gamma distribution to positive samples by method of moments.
pub fn fit_gamma_mom(samples: &[f64]) -> Result<DistributionSpec> {
    if samples.len() < 2 {
        return Err(Error::FitInfeasible(String::from(
            "gamma fit needs at least 2 samples",
        )));
    }
    if samples.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidInput(String::from(
            "gamma fit requires strictly positive samples",
        )));
    }
    let (mean, m2, _) = central_moments(samples);
    gamma_from_moments(mean, m2)
}

/// Excess (Fisher) kurtosis `m4 / m2^2 - 3`, central moments over `n`.
///
/// Needs at least 4 observations and non-zero variance.
pub fn excess_kurtosis(samples: &[f64]) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::UndefinedStatistic(format!(
            "kurtosis needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    let (_, m2, m4) = central_moments(samples);
    if m2 <= 0.0 {
        return Err(Error::UndefinedStatistic(String::from(
            "kurtosis undefined for zero-variance samples",
        )));
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Linear-interpolation quantile of already sorted data, `q` in [0, 1].
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Silverman's rule-of-thumb bandwidth `0.9 min(sigma, IQR/1.34) n^{-1/5}`.
///
/// Falls back to the sample standard deviation when the IQR degenerates;
/// errors when the sample itself has zero spread.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::UndefinedStatistic(String::from(
            "bandwidth needs at least 2 samples",
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(String::from(
            "bandwidth needs finite samples",
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let sigma = math::sqrt(var);
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples compare"));
    let iqr = sorted_quantile(&sorted, 0.75) - sorted_quantile(&sorted, 0.25);
    let scale = if iqr > 0.0 {
        sigma.min(iqr / 1.34)
    } else {
        sigma
    };
    if scale <= 0.0 {
        return Err(Error::UndefinedStatistic(String::from(
            "bandwidth undefined for zero-spread samples",
        )));
    }
    Ok(0.9 * scale * math::powf(n, -0.2))
}

/// Gaussian-kernel density estimate at the requested evaluation points.
pub fn gaussian_kde(samples: &[f64], eval_points: &[f64]) -> Result<Vec<f64>> {
    let h = silverman_bandwidth(samples)?;
    let norm = 1.0 / (samples.len() as f64 * h * math::sqrt(2.0 * core::f64::consts::PI));
    Ok(eval_points
        .iter()
        .map(|&x| {
            let acc: f64 = samples
                .iter()
                .map(|&xi| {
                    let u = (x - xi) / h;
                    math::exp(-0.5 * u * u)
                })
                .sum();
            acc * norm
        })
        .collect())
}

/// Rounds a raw spread draw up to a whole number of ticks: `ceil(value) * tick`.
///
/// The draw is interpreted in tick units, so any positive value maps to at
/// least one tick.
pub fn tick_ceiling(value: f64, tick: f64) -> Result<f64> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tick ceiling needs a positive value, got {value}"
        )));
    }
    if !(tick.is_finite() && tick > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tick size must be positive, got {tick}"
        )));
    }
    Ok(math::ceil(value) * tick)
}

/// Rounds each value half-away-from-zero to the given number of decimals.
pub fn round_changes(values: &[f64], decimals: u32) -> Vec<f64> {
    let factor = math::powf(10.0, decimals as f64);
    values
        .iter()
        .map(|&x| math::round(x * factor) / factor)
        .collect()
}

/// Count, mean, sample standard deviation, range, and excess kurtosis.
///
/// `excess_kurtosis` is `None` when fewer than 4 observations or zero
/// variance make it undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub excess_kurtosis: Option<f64>,
}

impl SummaryStats {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::UndefinedStatistic(String::from(
                "summary statistics need at least 1 sample",
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericFailure(String::from(
                "summary statistics hit a non-finite sample",
            )));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let stddev = if samples.len() > 1 {
            let ss = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
            math::sqrt(ss / (n - 1.0))
        } else {
            0.0
        };
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            count: samples.len(),
            mean,
            stddev,
            min,
            max,
            excess_kurtosis: excess_kurtosis(samples).ok(),
        })
    }
}
