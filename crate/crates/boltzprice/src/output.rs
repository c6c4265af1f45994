//! CSV and JSON emitters for the CLI.
//!
//! All numbers go through the 9-significant-digit formatter, so outputs are
//! byte-stable across runs and locales.

use crate::format::{fmt_sig, round_sig};
use crate::ingest::DerivedSeries;
use boltzprice_core::dynamics::BatchResult;
use boltzprice_core::impact::ImpactCurve;
use boltzprice_core::microprice::MicropriceTable;
use boltzprice_core::stochastics::SummaryStats;
use serde_json::{json, Map, Value};
use std::io::{self, Write};

/// Writes the per-bin price series: the derived columns followed by the
/// price family (quasi-equilibrium, equilibrium, one Boltzmann column per
/// requested beta). Prices use the exact closed form
/// `mid + (S/2) tanh(beta theta)`.
pub fn write_prices_csv<W: Write>(
    out: &mut W,
    series: &DerivedSeries,
    betas: &[f64],
) -> io::Result<()> {
    let mut header =
        String::from("timestamp,mid,weighted,theta,spread,quasi_equilibrium,equilibrium");
    for beta in betas {
        header.push_str(&format!(",boltzmann_{}", fmt_sig(*beta)));
    }
    writeln!(out, "{header}")?;
    for i in 0..series.len() {
        let mid = series.mid[i];
        let spread = series.spread[i];
        let theta = series.theta[i];
        let boltzmann = |beta: f64| mid + 0.5 * spread * (beta * theta).tanh();
        let mut row = format!(
            "{},{},{},{},{},{},{}",
            series.timestamps[i].to_rfc3339(),
            fmt_sig(mid),
            fmt_sig(series.weighted[i]),
            fmt_sig(theta),
            fmt_sig(spread),
            fmt_sig(0.5 * (mid + series.weighted[i])),
            fmt_sig(boltzmann(1.0)),
        );
        for beta in betas {
            row.push_str(&format!(",{}", fmt_sig(boltzmann(*beta))));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn write_impact_csv<W: Write>(out: &mut W, curve: &ImpactCurve) -> io::Result<()> {
    writeln!(out, "theta,boltzmann_change,weighted_mid_change,mid_change")?;
    for i in 0..curve.theta_grid.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_sig(curve.theta_grid[i]),
            fmt_sig(curve.price_change[i]),
            fmt_sig(curve.weighted_mid_change[i]),
            fmt_sig(curve.mid_change[i]),
        )?;
    }
    Ok(())
}

/// Micro-price table export: one row per (bucket, spread state); unvisited
/// rows carry `NA`.
pub fn write_microprice_table_csv<W: Write>(
    out: &mut W,
    table: &MicropriceTable,
) -> io::Result<()> {
    writeln!(out, "bucket_low,bucket_high,spread_state,adjustment")?;
    let disc = &table.disc;
    let width = 1.0 / disc.imbalance_buckets as f64;
    for bucket in 0..disc.imbalance_buckets {
        for (k, state_ticks) in disc.spread_states.iter().enumerate() {
            let adjustment = match table.adjustment(bucket, k) {
                Some(a) => fmt_sig(a),
                None => "NA".to_string(),
            };
            writeln!(
                out,
                "{},{},{},{}",
                fmt_sig(bucket as f64 * width),
                fmt_sig((bucket + 1) as f64 * width),
                state_ticks,
                adjustment,
            )?;
        }
    }
    Ok(())
}

pub fn write_microprice_series_csv<W: Write>(
    out: &mut W,
    series: &boltzprice_core::microprice::QuoteSeries,
    microprices: &[f64],
) -> io::Result<()> {
    writeln!(out, "index,mid,imbalance,spread,microprice")?;
    for (i, micro) in microprices.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            i,
            fmt_sig(series.mids()[i]),
            fmt_sig(series.imbalances()[i]),
            fmt_sig(series.spreads()[i]),
            fmt_sig(*micro),
        )?;
    }
    Ok(())
}

pub fn write_runs_csv<W: Write>(out: &mut W, result: &BatchResult) -> io::Result<()> {
    writeln!(
        out,
        "run,excess_kurtosis,increment_mean,increment_std,terminal_price"
    )?;
    for (r, stats) in result.per_run.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            r,
            fmt_sig(stats.excess_kurtosis),
            fmt_sig(stats.increment_mean),
            fmt_sig(stats.increment_std),
            fmt_sig(stats.terminal_price),
        )?;
    }
    Ok(())
}

/// Full audit dump of one simulated path. Row 0 carries the initial price;
/// audit columns the model did not draw stay empty.
pub fn write_path_csv<W: Write>(
    out: &mut W,
    path: &boltzprice_core::dynamics::PricePath,
) -> io::Result<()> {
    writeln!(out, "step,price,increment,theta,spread,noise")?;
    let cell = |seq: &[f64], i: usize| seq.get(i).map(|x| fmt_sig(*x)).unwrap_or_default();
    for (i, price) in path.prices.iter().enumerate() {
        if i == 0 {
            writeln!(out, "0,{},,,,", fmt_sig(*price))?;
            continue;
        }
        writeln!(
            out,
            "{},{},{},{},{},{}",
            i,
            fmt_sig(*price),
            cell(&path.increments, i - 1),
            cell(&path.thetas, i - 1),
            cell(&path.spreads, i - 1),
            cell(&path.noises, i - 1),
        )?;
    }
    Ok(())
}

pub fn write_kde_csv<W: Write>(out: &mut W, grid: &[f64], density: &[f64]) -> io::Result<()> {
    writeln!(out, "x,density")?;
    for (x, d) in grid.iter().zip(density) {
        writeln!(out, "{},{}", fmt_sig(*x), fmt_sig(*d))?;
    }
    Ok(())
}

pub fn summary_stats_json(stats: &SummaryStats) -> Value {
    let mut map = Map::new();
    map.insert("count".into(), json!(stats.count));
    map.insert("mean".into(), json!(round_sig(stats.mean)));
    map.insert("stddev".into(), json!(round_sig(stats.stddev)));
    map.insert("min".into(), json!(round_sig(stats.min)));
    map.insert("max".into(), json!(round_sig(stats.max)));
    map.insert(
        "excess_kurtosis".into(),
        match stats.excess_kurtosis {
            Some(k) => json!(round_sig(k)),
            None => Value::Null,
        },
    );
    Value::Object(map)
}

pub fn batch_result_json(result: &BatchResult) -> Value {
    json!({
        "runs": result.runs,
        "excess_kurtosis": summary_stats_json(&result.kurtosis),
        "increment_mean": summary_stats_json(&result.increment_mean),
        "increment_std": summary_stats_json(&result.increment_std),
        "terminal_price": summary_stats_json(&result.terminal_price),
    })
}
