//! Micro-price estimation on discretized imbalance/spread states, plus the
//! large-tick toy model whose micro-price is known in closed form.
//!
//! The estimator works on a binned quote series. For every observation it
//! looks up the next observation whose mid differs; the first adjustment
//! `g^1(q, S)` is the expected mid change to that event, and later terms
//! follow the recursion `g^{i+1}(q, S) = E[g^i at the state where the change
//! landed]`. The reported adjustment is the cumulative sum, cut off after a
//! fixed number of iterations or once the last term falls below `1e-4` ticks.
//! States that the data never leaves through a mid change carry an explicit
//! missing marker rather than a zero, so downstream lookups fail loudly.
//!
//! The toy model moves the imbalance as a symmetric lattice walk on `[0, 1]`
//! (boundary hits are detected exactly, so hitting probabilities carry no
//! discretization bias). On a boundary hit the mid jumps half a tick with
//! probability `alpha` — restarting the imbalance at `epsilon` after an up
//! move at 1, at `1 - epsilon` after a down move at 0, and on the opposite
//! side when the mid stays put. Its micro-price is
//! `(1 - alpha) P_mid + alpha P_w`, the first adjustment per bucket midpoint
//! is `alpha (I - 1/2) tick`, and subsequent adjustments shrink with
//! `(1 - 2 epsilon)(1 - 2 alpha)`.

use crate::error::{Error, Result};
use crate::prices::TopOfBook;
use crate::stochastics::RngSpec;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, RngCore};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Aligned binned quote observations: mid price, bid imbalance `q`, spread.
#[derive(Debug, Clone, PartialEq)]
pub struct QuoteSeries {
    mids: Vec<f64>,
    imbalances: Vec<f64>,
    spreads: Vec<f64>,
}

impl QuoteSeries {
    pub fn new(mids: Vec<f64>, imbalances: Vec<f64>, spreads: Vec<f64>) -> Result<Self> {
        let n = mids.len();
        if imbalances.len() != n || spreads.len() != n {
            return Err(Error::InvalidInput(format!(
                "series must align: mids={n}, imbalances={}, spreads={}",
                imbalances.len(),
                spreads.len()
            )));
        }
        if mids.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidInput(String::from("mids must be finite")));
        }
        if imbalances
            .iter()
            .any(|&q| !(q.is_finite() && (0.0..=1.0).contains(&q)))
        {
            return Err(Error::InvalidInput(String::from(
                "imbalances must lie in [0, 1]",
            )));
        }
        if spreads.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidInput(String::from(
                "spreads must be positive",
            )));
        }
        Ok(Self {
            mids,
            imbalances,
            spreads,
        })
    }

    pub fn len(&self) -> usize {
        self.mids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mids.is_empty()
    }

    pub fn mids(&self) -> &[f64] {
        &self.mids
    }

    pub fn imbalances(&self) -> &[f64] {
        &self.imbalances
    }

    pub fn spreads(&self) -> &[f64] {
        &self.spreads
    }
}

/// Imbalance/spread discretization for the estimator.
///
/// Imbalance buckets are equal-width on `[0, 1]` with midpoints as
/// representative values; spread states are whole tick multiples, and
/// observations are matched to the nearest multiple (off-grid spreads are
/// dropped during estimation).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Discretization {
    pub imbalance_buckets: usize,
    pub spread_states: Vec<u32>,
    pub tick: f64,
    pub symmetrize: bool,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            imbalance_buckets: 10,
            spread_states: vec![1],
            tick: 0.01,
            symmetrize: true,
        }
    }
}

impl Discretization {
    pub fn validate(&self) -> Result<()> {
        if self.imbalance_buckets < 2 {
            return Err(Error::InvalidInput(String::from(
                "need at least 2 imbalance buckets",
            )));
        }
        if self.spread_states.is_empty() {
            return Err(Error::InvalidInput(String::from(
                "need at least 1 spread state",
            )));
        }
        if self.spread_states.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(String::from(
                "spread states must be sorted and distinct",
            )));
        }
        if self.spread_states.contains(&0) {
            return Err(Error::InvalidInput(String::from(
                "spread states are positive tick multiples",
            )));
        }
        if !(self.tick.is_finite() && self.tick > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tick must be positive, got {}",
                self.tick
            )));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.imbalance_buckets * self.spread_states.len()
    }

    pub fn state_index(&self, bucket: usize, spread_idx: usize) -> usize {
        bucket * self.spread_states.len() + spread_idx
    }

    /// Representative imbalance of a bucket (its midpoint).
    pub fn bucket_midpoint(&self, bucket: usize) -> f64 {
        (bucket as f64 + 0.5) / self.imbalance_buckets as f64
    }

    fn bucket_of(&self, q: f64) -> usize {
        ((q * self.imbalance_buckets as f64) as usize).min(self.imbalance_buckets - 1)
    }

    fn spread_idx_of(&self, spread: f64) -> Option<usize> {
        let ticks = libm::round(spread / self.tick);
        if !(ticks.is_finite() && ticks >= 1.0 && ticks <= u32::MAX as f64) {
            return None;
        }
        let ticks = ticks as u32;
        self.spread_states.iter().position(|&s| s == ticks)
    }

    fn classify(&self, q: f64, spread: f64) -> Option<usize> {
        Some(self.state_index(self.bucket_of(q), self.spread_idx_of(spread)?))
    }
}

/// Mid-change transition counts per discretized state.
///
/// A transition records, for an observation in state `s`, the mid change at
/// the next observation whose mid differs and the state observed there.
/// Symmetrization adds every transition's mirror image
/// `(theta -> -theta, dmid -> -dmid)`.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    disc: Discretization,
    counts: Vec<u64>,
    change_sums: Vec<f64>,
    dest_counts: Vec<Vec<u64>>,
    dropped_observations: usize,
}

impl TransitionModel {
    pub fn from_series(series: &QuoteSeries, disc: &Discretization) -> Result<Self> {
        disc.validate()?;
        if series.is_empty() {
            return Err(Error::InvalidInput(String::from("empty quote series")));
        }
        let n_states = disc.n_states();
        let mut model = Self {
            disc: disc.clone(),
            counts: vec![0; n_states],
            change_sums: vec![0.0; n_states],
            dest_counts: vec![vec![0; n_states]; n_states],
            dropped_observations: 0,
        };

        let n = series.len();
        // next_change[i]: first j > i with mids[j] != mids[i].
        let mut next_change: Vec<Option<usize>> = vec![None; n];
        let mut next = None;
        for i in (0..n - 1).rev() {
            if series.mids[i + 1] != series.mids[i] {
                next = Some(i + 1);
            }
            next_change[i] = next;
        }

        for (i, next) in next_change.iter().enumerate() {
            let Some(j) = *next else { continue };
            let dmid = series.mids[j] - series.mids[i];
            if let (Some(from), Some(to)) = (
                model.disc.classify(series.imbalances[i], series.spreads[i]),
                model.disc.classify(series.imbalances[j], series.spreads[j]),
            ) {
                model.record(from, dmid, to);
            } else {
                model.dropped_observations += 1;
                continue;
            }
            // Symmetrization feeds each transition's sign-flipped image
            // (q -> 1 - q, dmid -> -dmid) through the same classifier, so the
            // estimate on a series equals the estimate on its flipped copy.
            if model.disc.symmetrize {
                if let (Some(from), Some(to)) = (
                    model
                        .disc
                        .classify(1.0 - series.imbalances[i], series.spreads[i]),
                    model
                        .disc
                        .classify(1.0 - series.imbalances[j], series.spreads[j]),
                ) {
                    model.record(from, -dmid, to);
                }
            }
        }
        Ok(model)
    }

    fn record(&mut self, from: usize, dmid: f64, to: usize) {
        self.counts[from] += 1;
        self.change_sums[from] += dmid;
        self.dest_counts[from][to] += 1;
    }

    pub fn total_transitions(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Observations skipped because their spread was off the grid.
    pub fn dropped_observations(&self) -> usize {
        self.dropped_observations
    }

    /// First adjustment: expected mid change to the next mid-change event.
    pub fn g1(&self) -> Vec<Option<f64>> {
        (0..self.counts.len())
            .map(|s| {
                if self.counts[s] > 0 {
                    Some(self.change_sums[s] / self.counts[s] as f64)
                } else {
                    None
                }
            })
            .collect()
    }

    /// One recursion step: expectation of `g` over the state reached at the
    /// next mid change. States whose reachable destinations include an
    /// unresolved state stay unresolved.
    pub fn propagate(&self, g: &[Option<f64>]) -> Vec<Option<f64>> {
        (0..self.counts.len())
            .map(|s| {
                if self.counts[s] == 0 {
                    return None;
                }
                let mut acc = 0.0;
                for (dest, &count) in self.dest_counts[s].iter().enumerate() {
                    if count == 0 {
                        continue;
                    }
                    acc += g[dest]? * count as f64;
                }
                Some(acc / self.counts[s] as f64)
            })
            .collect()
    }
}

/// Estimated cumulative mid-price adjustment per (bucket, spread state).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MicropriceTable {
    pub disc: Discretization,
    /// `sum_k g^k` per state; `None` marks states without data.
    pub adjustments: Vec<Option<f64>>,
    /// Individual terms `g^1, g^2, ...` as computed.
    pub g_terms: Vec<Vec<Option<f64>>>,
    pub iterations_used: usize,
    /// Max-abs of the last computed term.
    pub residual: f64,
    pub converged: bool,
}

impl MicropriceTable {
    /// Builds a table directly from known adjustments (analytic oracles,
    /// external estimates).
    pub fn with_adjustments(disc: Discretization, adjustments: Vec<Option<f64>>) -> Result<Self> {
        disc.validate()?;
        if adjustments.len() != disc.n_states() {
            return Err(Error::InvalidInput(format!(
                "expected {} adjustments, got {}",
                disc.n_states(),
                adjustments.len()
            )));
        }
        Ok(Self {
            disc,
            g_terms: vec![adjustments.clone()],
            adjustments,
            iterations_used: 1,
            residual: 0.0,
            converged: true,
        })
    }

    pub fn adjustment(&self, bucket: usize, spread_idx: usize) -> Option<f64> {
        self.adjustments[self.disc.state_index(bucket, spread_idx)]
    }
}

/// Estimates the micro-price adjustment table from a binned quote series.
///
/// Iteration stops after `iterations` terms (6 is the usual choice) or once
/// the last term's max-abs drops below `1e-4` ticks. A series that contains
/// no mid change at all yields an all-zero table flagged as non-converged.
pub fn estimate_microprice(
    series: &QuoteSeries,
    disc: &Discretization,
    iterations: usize,
) -> Result<MicropriceTable> {
    if iterations == 0 {
        return Err(Error::InvalidInput(String::from(
            "need at least one iteration",
        )));
    }
    let model = TransitionModel::from_series(series, disc)?;
    let n_states = disc.n_states();
    if model.total_transitions() == 0 {
        return Ok(MicropriceTable {
            disc: disc.clone(),
            adjustments: vec![Some(0.0); n_states],
            g_terms: vec![vec![Some(0.0); n_states]],
            iterations_used: 1,
            residual: f64::INFINITY,
            converged: false,
        });
    }

    let tolerance = 1e-4 * disc.tick;
    let mut g_terms = vec![model.g1()];
    let mut residual = max_abs(g_terms.last().unwrap());
    while g_terms.len() < iterations && residual > tolerance {
        let next = model.propagate(g_terms.last().unwrap());
        residual = max_abs(&next);
        g_terms.push(next);
    }

    let adjustments = (0..n_states)
        .map(|s| {
            let mut acc = 0.0;
            for term in &g_terms {
                acc += term[s]?;
            }
            Some(acc)
        })
        .collect();

    Ok(MicropriceTable {
        disc: disc.clone(),
        adjustments,
        iterations_used: g_terms.len(),
        residual,
        converged: residual <= tolerance,
        g_terms,
    })
}

fn max_abs(g: &[Option<f64>]) -> f64 {
    g.iter()
        .flatten()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Micro-price series: per observation, mid plus the table adjustment at its
/// (bucket, spread) state. Fails on observations whose state is off the grid
/// or carries a missing marker.
pub fn microprice_series(series: &QuoteSeries, table: &MicropriceTable) -> Result<Vec<f64>> {
    (0..series.len())
        .map(|i| {
            let state = table
                .disc
                .classify(series.imbalances[i], series.spreads[i])
                .ok_or_else(|| {
                    Error::MissingData(format!(
                        "observation {i}: spread {} is not on the discretization grid",
                        series.spreads[i]
                    ))
                })?;
            let adj = table.adjustments[state].ok_or_else(|| {
                Error::MissingData(format!(
                    "observation {i}: no estimate for its (bucket, spread) state"
                ))
            })?;
            Ok(series.mids[i] + adj)
        })
        .collect()
}

/// Large-tick toy model configuration.
///
/// The imbalance starts near `1/2` and diffuses on a fine lattice until it
/// hits 0 or 1 (`epsilon_perturb` is snapped to that lattice). `events`
/// counts boundary hits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ToyModelConfig {
    pub alpha: f64,
    pub epsilon_perturb: f64,
    pub tick: f64,
    pub events: usize,
    pub rng: RngSpec,
}

impl ToyModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.epsilon_perturb.is_finite()
            && self.epsilon_perturb > 0.0
            && self.epsilon_perturb < 0.5)
        {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon_perturb
            )));
        }
        if !(self.tick.is_finite() && self.tick > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tick must be positive, got {}",
                self.tick
            )));
        }
        if self.events == 0 {
            return Err(Error::InvalidInput(String::from("need at least 1 event")));
        }
        Ok(())
    }
}

/// Output of the toy simulation: a thinned quote series for the estimator
/// plus event-level tallies.
#[derive(Debug, Clone, PartialEq)]
pub struct ToySeries {
    pub series: QuoteSeries,
    pub hits_upper: u64,
    pub hits_lower: u64,
    pub mid_up_moves: u64,
    pub mid_down_moves: u64,
}

impl ToySeries {
    pub fn mid_moves(&self) -> u64 {
        self.mid_up_moves + self.mid_down_moves
    }
}

// 101 sites keep lattice imbalances off the default bucket edges, so
// symmetrization pairs buckets exactly.
const TOY_LATTICE: i64 = 101;
const TOY_OBS_STRIDE: u32 = 256;
const TOY_BASE_MID: f64 = 100.0;

/// Simulates the large-tick toy model.
///
/// On a hit at 1 the mid moves up half a tick with probability `alpha` and
/// the imbalance restarts at `epsilon`; otherwise the mid stays and the
/// imbalance restarts at `1 - epsilon` (mirrored at 0). Observations are
/// recorded every 256 lattice steps; the mid is tracked in exact half-tick
/// units so equal mids compare equal bit for bit.
pub fn simulate_toy_large_tick(config: &ToyModelConfig) -> Result<ToySeries> {
    config.validate()?;
    let eps_site = ((config.epsilon_perturb * TOY_LATTICE as f64) as i64).clamp(1, TOY_LATTICE / 2 - 1);

    let mut walk_rng = config.rng.lane(0).rng();
    let mut event_rng = config.rng.lane(1).rng();
    let mut bits: u64 = 0;
    let mut bits_left: u32 = 0;

    let half_tick = 0.5 * config.tick;
    let mut pos: i64 = TOY_LATTICE / 2;
    let mut mid_halves: i64 = 0;

    let expected_obs = config.events * 12; // rough: ~2.5e3 steps/event at eps near 1/2
    let mut mids = Vec::with_capacity(expected_obs);
    let mut imbalances = Vec::with_capacity(expected_obs);
    let mut spreads = Vec::with_capacity(expected_obs);

    let mut hits_upper = 0u64;
    let mut hits_lower = 0u64;
    let mut mid_up_moves = 0u64;
    let mut mid_down_moves = 0u64;

    let mut events_done = 0usize;
    let mut obs_countdown = TOY_OBS_STRIDE;

    while events_done < config.events {
        if bits_left == 0 {
            bits = walk_rng.next_u64();
            bits_left = 64;
        }
        pos += if bits & 1 == 1 { 1 } else { -1 };
        bits >>= 1;
        bits_left -= 1;

        if pos == 0 || pos == TOY_LATTICE {
            let at_upper = pos == TOY_LATTICE;
            if at_upper {
                hits_upper += 1;
            } else {
                hits_lower += 1;
            }
            let moves: bool = event_rng.gen::<f64>() < config.alpha;
            if moves {
                if at_upper {
                    mid_halves += 1;
                    mid_up_moves += 1;
                    pos = eps_site;
                } else {
                    mid_halves -= 1;
                    mid_down_moves += 1;
                    pos = TOY_LATTICE - eps_site;
                }
            } else {
                pos = if at_upper {
                    TOY_LATTICE - eps_site
                } else {
                    eps_site
                };
            }
            events_done += 1;
        }

        obs_countdown -= 1;
        if obs_countdown == 0 {
            obs_countdown = TOY_OBS_STRIDE;
            mids.push(TOY_BASE_MID + mid_halves as f64 * half_tick);
            imbalances.push(pos as f64 / TOY_LATTICE as f64);
            spreads.push(config.tick);
        }
    }

    Ok(ToySeries {
        series: QuoteSeries::new(mids, imbalances, spreads)?,
        hits_upper,
        hits_lower,
        mid_up_moves,
        mid_down_moves,
    })
}

/// Closed-form micro-price of the unit-spread toy model:
/// `(1 - alpha) P_mid + alpha P_w`.
///
/// Coincides with the Boltzmann decomposition at `beta = 2 alpha`.
pub fn analytic_toy_microprice(alpha: f64, book: &TopOfBook) -> Result<f64> {
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok((1.0 - alpha) * book.mid_price() + alpha * book.weighted_mid_price())
}
