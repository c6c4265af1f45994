//! Maximum-entropy price family for limit-order-book top-of-book data.
//!
//! The crate is organized around five building blocks:
//!
//! * [`prices`] — top-of-book quantities (mid, weighted mid, imbalance) and the
//!   Boltzmann price family obtained from the maximum-entropy two-state
//!   distribution, including its equilibrium / quasi-equilibrium special cases
//!   and the mid/weighted-mid decomposition.
//! * [`stochastics`] — seeded sampling (Beta, Gamma, Normal, constant),
//!   method-of-moments fitting, excess kurtosis, Gaussian KDE with Silverman
//!   bandwidth, and tick rounding helpers.
//! * [`dynamics`] — discrete-time simulators for the imbalance-driven price
//!   process and the Bachelier/GBM baselines, with shared-noise pairing, drift
//!   matching, and a deterministic batch Monte Carlo harness.
//! * [`impact`] — market-impact calculus on the Boltzmann price: derivatives,
//!   finite imbalance moves, lagged impact functions, and market-maker P&L.
//! * [`microprice`] — the discretized micro-price estimator plus the
//!   large-tick toy model with its analytic ground truth.
//!
//! The crate is `no_std`-compatible (`alloc` required); all transcendental
//! math goes through `libm` so results do not depend on the enabled features.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod impact;
mod math;
pub mod microprice;
pub mod prices;
pub mod stochastics;

pub use error::{Error, Result};
