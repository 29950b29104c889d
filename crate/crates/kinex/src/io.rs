//! CSV readers and writers for snapshots, analysis inputs, and plot data.
//!
//! Snapshot files carry full-precision values so a re-read reproduces the
//! exact bits (and content digests stay stable). Plot files round to six
//! significant digits; they exist to be drawn, not re-ingested.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::market::MarketState;
use crate::stats::{Histogram, LorenzCurve};

/// Column names accepted when ingesting a sample file with several columns.
/// A single-column file is accepted under any header name.
const VALUE_COLUMNS: [&str; 3] = ["value", "balance", "w_tilde"];

fn open_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Write one balance per line under a `balance` header, ordered by agent
/// index, at full precision.
pub fn write_balances_csv(path: &Path, balances: &[f64]) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "balance")?;
    for b in balances {
        writeln!(w, "{b}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write generic samples under a `value` header, at full precision.
pub fn write_values_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "value")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write relative wealths under a `w_tilde` header, ordered by agent index.
pub fn write_relative_csv(path: &Path, wealths: &[f64]) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "w_tilde")?;
    for v in wealths {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write per-agent money and stock under a `money,stock` header.
pub fn write_market_csv(path: &Path, market: &MarketState) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "money,stock")?;
    for (m, s) in market.money().iter().zip(market.stock()) {
        writeln!(w, "{m},{s}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write Lorenz curve points as `population_share,income_share` plot data.
pub fn write_lorenz_csv(path: &Path, curve: &LorenzCurve) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "population_share,income_share")?;
    for (x, y) in &curve.points {
        writeln!(w, "{x:.5e},{y:.5e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write histogram bins as `lower_bound,upper_bound,count,density` plot data.
pub fn write_histogram_csv(path: &Path, hist: &Histogram) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "lower_bound,upper_bound,count,density")?;
    let total = hist.total() as f64;
    for (i, &count) in hist.counts().iter().enumerate() {
        let lo = hist.edges()[i];
        let hi = hist.edges()[i + 1];
        let density = if total > 0.0 {
            count as f64 / (total * (hi - lo))
        } else {
            0.0
        };
        writeln!(w, "{lo:.5e},{hi:.5e},{count},{density:.5e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Write an entropy trajectory as `step,entropy` plot data.
pub fn write_entropy_csv(path: &Path, series: &[(u64, f64)]) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "step,entropy")?;
    for (step, s) in series {
        // +0.0 folds a negative zero into plain zero before printing.
        writeln!(w, "{step},{:.5e}", s + 0.0)?;
    }
    w.flush()?;
    Ok(())
}

/// Write an evaluated law as `r,pdf,ccdf` plot data.
pub fn write_curve_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut w = open_writer(path)?;
    writeln!(w, "r,pdf,ccdf")?;
    for (r, pdf, ccdf) in rows {
        writeln!(w, "{r:.5e},{pdf:.5e},{ccdf:.5e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a sample file: a headered CSV with either a single column or a
/// column named `value`, `balance`, or `w_tilde`. Every entry must be a
/// finite number.
pub fn read_values_csv(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let column = if headers.len() == 1 {
        0
    } else {
        headers
            .iter()
            .position(|h| VALUE_COLUMNS.contains(&h))
            .ok_or_else(|| {
                Error::Malformed(format!(
                    "no value column among `{}`; expected one of {:?}",
                    headers.iter().collect::<Vec<_>>().join(","),
                    VALUE_COLUMNS
                ))
            })?
    };
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let field = record.get(column).ok_or_else(|| {
            Error::Malformed(format!("row {}: missing column {column}", row + 2))
        })?;
        let value: f64 = field
            .parse()
            .map_err(|_| Error::Malformed(format!("row {}: `{field}` is not a number", row + 2)))?;
        if !value.is_finite() {
            return Err(Error::Malformed(format!(
                "row {}: `{field}` is not finite",
                row + 2
            )));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("csv sample file"));
    }
    Ok(values)
}

/// Read a binned cumulative table: columns `lower_bound,cum_count`, where
/// each row counts observations at or above its lower bound. Bounds must
/// increase strictly and counts must be non-increasing and non-negative.
pub fn read_binned_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Malformed(format!("missing column `{name}`")))
    };
    let lb = col("lower_bound")?;
    let cc = col("cum_count")?;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |idx: usize| -> Result<f64> {
            let field = record
                .get(idx)
                .ok_or_else(|| Error::Malformed(format!("row {}: missing field", row + 2)))?;
            let v: f64 = field.parse().map_err(|_| {
                Error::Malformed(format!("row {}: `{field}` is not a number", row + 2))
            })?;
            if !v.is_finite() {
                return Err(Error::Malformed(format!(
                    "row {}: `{field}` is not finite",
                    row + 2
                )));
            }
            Ok(v)
        };
        let bound = parse(lb)?;
        let count = parse(cc)?;
        if count < 0.0 {
            return Err(Error::Malformed(format!(
                "row {}: negative cumulative count",
                row + 2
            )));
        }
        if let Some(&(prev_bound, prev_count)) = rows.last() {
            if bound <= prev_bound {
                return Err(Error::Malformed(format!(
                    "row {}: lower bounds must increase strictly",
                    row + 2
                )));
            }
            if count > prev_count {
                return Err(Error::Malformed(format!(
                    "row {}: cumulative counts must not increase",
                    row + 2
                )));
            }
        }
        rows.push((bound, count));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("binned table"));
    }
    Ok(rows)
}
