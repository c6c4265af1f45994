//! IO, configuration, CLI, and parallel batch layer over `boltzprice-core`.
//!
//! * [`ingest`] — quote CSV parsing, 1-minute binning, session filters, and
//!   derived mid/weighted/imbalance/spread series.
//! * [`config`] — TOML experiment files with strict schema validation.
//! * [`batch`] — rayon-parallel, thread-count-independent Monte Carlo
//!   batches.
//! * [`output`] / [`format`] — byte-stable CSV/JSON emission with 9
//!   significant digits.
//! * [`cli`] — the `boltzprice` command-line interface.

pub mod batch;
pub mod cli;
pub mod config;
pub mod format;
pub mod ingest;
pub mod output;

pub use boltzprice_core as core;
