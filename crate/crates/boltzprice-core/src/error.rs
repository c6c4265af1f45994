//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its documented domain.
    InvalidInput(String),
    /// Sample moments are incompatible with the requested distribution family.
    FitInfeasible(String),
    /// The requested statistic is undefined for the given sample
    /// (degenerate data, too few observations).
    UndefinedStatistic(String),
    /// `|mu| >= sigma`: no imbalance distribution can reproduce the drift.
    InfeasibleDrift { mu: f64, sigma: f64 },
    /// A simulation produced a non-finite value.
    NumericFailure(String),
    /// A lookup hit a state that was never visited during estimation.
    MissingData(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::FitInfeasible(msg) => write!(f, "fit infeasible: {msg}"),
            Error::UndefinedStatistic(msg) => write!(f, "undefined statistic: {msg}"),
            Error::InfeasibleDrift { mu, sigma } => write!(
                f,
                "infeasible drift: |mu/sigma| must be < 1, got mu={mu}, sigma={sigma}"
            ),
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            Error::MissingData(msg) => write!(f, "missing data: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
