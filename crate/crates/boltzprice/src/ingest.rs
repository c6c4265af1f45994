//! Quote CSV loading, time binning, session filtering, and series derivation.
//!
//! Input schema (header required):
//!
//! ```text
//! timestamp,bid_price,ask_price,bid_size,ask_size
//! ```
//!
//! Timestamps are RFC 3339 with an explicit zone offset; session times are
//! interpreted in each timestamp's own offset. Binning keeps the last quote
//! of each non-empty bin (file order breaks timestamp ties) and empty bins
//! are omitted rather than forward-filled. The session filter keeps bins
//! whose start lies in `[start + trim, end - trim)`, drops locked quotes,
//! and flags each day's first retained bin so the derived mid-change series
//! never spans a day boundary.

use boltzprice_core::microprice::QuoteSeries;
use chrono::{DateTime, FixedOffset, NaiveTime, Timelike};
use serde::Serialize;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

pub const QUOTE_CSV_HEADER: &str = "timestamp,bid_price,ask_price,bid_size,ask_size";

/// One validated quote row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteRecord {
    pub timestamp: DateTime<FixedOffset>,
    pub bid_price: f64,
    pub ask_price: f64,
    pub bid_size: f64,
    pub ask_size: f64,
}

impl QuoteRecord {
    pub fn mid(&self) -> f64 {
        0.5 * (self.bid_price + self.ask_price)
    }

    pub fn spread(&self) -> f64 {
        self.ask_price - self.bid_price
    }

    pub fn q_bid(&self) -> f64 {
        self.bid_size / (self.bid_size + self.ask_size)
    }

    pub fn weighted_mid(&self) -> f64 {
        let q = self.q_bid();
        q * self.ask_price + (1.0 - q) * self.bid_price
    }

    pub fn is_locked(&self) -> bool {
        self.bid_price == self.ask_price
    }
}

/// A rejected input row with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug)]
pub enum IngestError {
    Io(std::io::Error),
    /// The header line is missing or does not match the schema.
    Header { found: String },
    /// One or more rows failed validation; all offenders are listed.
    Rows(Vec<RowError>),
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Io(e) => write!(f, "io error: {e}"),
            IngestError::Header { found } => {
                write!(f, "expected header `{QUOTE_CSV_HEADER}`, found `{found}`")
            }
            IngestError::Rows(rows) => {
                writeln!(f, "{} malformed row(s):", rows.len())?;
                for row in rows {
                    writeln!(f, "  line {}: {}", row.line, row.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for IngestError {}

impl From<std::io::Error> for IngestError {
    fn from(e: std::io::Error) -> Self {
        IngestError::Io(e)
    }
}

fn parse_row(line: &str, lineno: usize) -> Result<QuoteRecord, RowError> {
    let err = |message: String| RowError {
        line: lineno,
        message,
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(err(format!("expected 5 fields, found {}", fields.len())));
    }
    let timestamp = DateTime::parse_from_rfc3339(fields[0])
        .map_err(|e| err(format!("bad timestamp `{}`: {e}", fields[0])))?;
    let mut nums = [0.0f64; 4];
    for (i, (slot, name)) in nums
        .iter_mut()
        .zip(["bid_price", "ask_price", "bid_size", "ask_size"])
        .enumerate()
    {
        *slot = fields[i + 1]
            .parse::<f64>()
            .map_err(|_| err(format!("non-numeric {name} `{}`", fields[i + 1])))?;
        if !slot.is_finite() {
            return Err(err(format!("non-finite {name}")));
        }
    }
    let [bid_price, ask_price, bid_size, ask_size] = nums;
    if bid_price <= 0.0 || ask_price <= 0.0 {
        return Err(err(format!(
            "prices must be positive, got bid={bid_price}, ask={ask_price}"
        )));
    }
    if bid_price > ask_price {
        return Err(err(format!(
            "crossed book: bid={bid_price} > ask={ask_price}"
        )));
    }
    if bid_size <= 0.0 || ask_size <= 0.0 {
        return Err(err(format!(
            "sizes must be positive, got bid={bid_size}, ask={ask_size}"
        )));
    }
    Ok(QuoteRecord {
        timestamp,
        bid_price,
        ask_price,
        bid_size,
        ask_size,
    })
}

/// Parses the quote CSV; locked rows (`bid == ask`) are retained here and
/// dropped by the session filter.
pub fn parse_quote_csv<R: BufRead>(reader: R) -> Result<Vec<QuoteRecord>, IngestError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(IngestError::Header {
                found: String::new(),
            })
        }
    };
    if header.trim_end_matches('\r').trim() != QUOTE_CSV_HEADER {
        return Err(IngestError::Header { found: header });
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        match parse_row(line, i + 2) {
            Ok(record) => records.push(record),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(records)
    } else {
        Err(IngestError::Rows(errors))
    }
}

pub fn parse_quote_csv_path<P: AsRef<Path>>(path: P) -> Result<Vec<QuoteRecord>, IngestError> {
    parse_quote_csv(BufReader::new(File::open(path)?))
}

/// A time bin and the last quote observed inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnedQuote {
    pub bin_start: DateTime<FixedOffset>,
    pub quote: QuoteRecord,
}

/// Keeps the chronologically last quote of each non-empty bin.
///
/// Records are stably sorted by instant first, so equal timestamps resolve
/// to the later file position. Bin starts are reported in each quote's own
/// zone offset.
pub fn bin_last_quote(records: &[QuoteRecord], bin_seconds: i64) -> Vec<BinnedQuote> {
    assert!(bin_seconds > 0, "bin width must be positive");
    let mut sorted: Vec<&QuoteRecord> = records.iter().collect();
    // Stable sort: equal instants keep file order, so the later row wins.
    sorted.sort_by_key(|r| r.timestamp.with_timezone(&chrono::Utc));

    let mut bins: Vec<BinnedQuote> = Vec::new();
    for quote in sorted {
        let bin_epoch = quote.timestamp.timestamp().div_euclid(bin_seconds) * bin_seconds;
        let bin_start = DateTime::from_timestamp(bin_epoch, 0)
            .expect("bin epoch in range")
            .with_timezone(quote.timestamp.offset());
        match bins.last_mut() {
            Some(last) if last.bin_start == bin_start => last.quote = *quote,
            _ => bins.push(BinnedQuote {
                bin_start,
                quote: *quote,
            }),
        }
    }
    bins
}

/// Session filtering policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPolicy {
    pub session_start: NaiveTime,
    pub session_end: NaiveTime,
    pub trim_minutes: u32,
    pub drop_locked: bool,
    pub drop_first_bin_change: bool,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self {
            session_start: NaiveTime::from_hms_opt(9, 30, 0).unwrap(),
            session_end: NaiveTime::from_hms_opt(16, 0, 0).unwrap(),
            trim_minutes: 4,
            drop_locked: true,
            drop_first_bin_change: true,
        }
    }
}

/// Per-reason drop bookkeeping: `bins_in = bins_kept + dropped_*`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropReport {
    pub bins_in: usize,
    pub bins_kept: usize,
    pub dropped_out_of_session: usize,
    pub dropped_locked: usize,
}

/// A retained bin; `exclude_change` marks each day's first retained bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredBin {
    pub bin: BinnedQuote,
    pub exclude_change: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSeries {
    pub bins: Vec<FilteredBin>,
    pub report: DropReport,
}

/// Applies the session window and locked-quote filters.
///
/// Idempotent: filtering an already filtered series changes nothing.
pub fn apply_session_filter(bins: &[BinnedQuote], policy: &FilterPolicy) -> FilteredSeries {
    let trim = chrono::Duration::minutes(policy.trim_minutes as i64);
    let window_start = policy.session_start + trim;
    let window_end = policy.session_end - trim;

    let mut report = DropReport {
        bins_in: bins.len(),
        ..DropReport::default()
    };
    let mut kept: Vec<FilteredBin> = Vec::new();
    let mut last_day = None;
    for bin in bins {
        let tod = bin.bin_start.time().with_nanosecond(0).unwrap();
        if tod < window_start || tod >= window_end {
            report.dropped_out_of_session += 1;
            continue;
        }
        if policy.drop_locked && bin.quote.is_locked() {
            report.dropped_locked += 1;
            continue;
        }
        let day = bin.bin_start.date_naive();
        let first_of_day = last_day != Some(day);
        last_day = Some(day);
        kept.push(FilteredBin {
            bin: *bin,
            exclude_change: policy.drop_first_bin_change && first_of_day,
        });
    }
    report.bins_kept = kept.len();
    FilteredSeries { bins: kept, report }
}

/// Aligned per-bin series plus the mid-change sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSeries {
    pub timestamps: Vec<DateTime<FixedOffset>>,
    pub mid: Vec<f64>,
    pub weighted: Vec<f64>,
    pub theta: Vec<f64>,
    pub spread: Vec<f64>,
    /// Mid-price differences between consecutive kept bins, omitting
    /// transitions into change-excluded (day-first) bins.
    pub mid_changes: Vec<f64>,
    pub changes_excluded: usize,
}

pub fn derive_series(filtered: &FilteredSeries) -> DerivedSeries {
    let n = filtered.bins.len();
    let mut out = DerivedSeries {
        timestamps: Vec::with_capacity(n),
        mid: Vec::with_capacity(n),
        weighted: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        spread: Vec::with_capacity(n),
        mid_changes: Vec::new(),
        changes_excluded: 0,
    };
    for (i, fb) in filtered.bins.iter().enumerate() {
        let q = &fb.bin.quote;
        out.timestamps.push(fb.bin.bin_start);
        out.mid.push(q.mid());
        out.weighted.push(q.weighted_mid());
        out.theta.push(q.q_bid() - 0.5);
        out.spread.push(q.spread());
        if i > 0 {
            if fb.exclude_change {
                out.changes_excluded += 1;
            } else {
                out.mid_changes.push(out.mid[i] - out.mid[i - 1]);
            }
        }
    }
    out
}

impl DerivedSeries {
    pub fn len(&self) -> usize {
        self.mid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mid.is_empty()
    }

    /// Bid imbalance series `q = theta + 1/2`.
    pub fn q_bid(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t + 0.5).collect()
    }

    /// Converts to the core quote series consumed by the micro-price
    /// estimator. Requires strictly positive spreads (drop locked quotes).
    pub fn to_quote_series(&self) -> Result<QuoteSeries, boltzprice_core::Error> {
        QuoteSeries::new(self.mid.clone(), self.q_bid(), self.spread.clone())
    }
}
