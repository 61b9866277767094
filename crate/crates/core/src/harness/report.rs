//! CSV serialization of trial records and sweep summaries.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces every record exactly. The number of `iter_ber_k` columns
//! is the deepest iteration count among the rows; shorter rows leave the
//! extra cells empty.

use std::io::{Read, Write};

use super::config::Format;
use super::sweep::SweepPoint;
use super::trial::MetricsRecord;
use crate::error::{Error, Result};

pub const CSV_FIXED_COLUMNS: [&str; 7] =
    ["format", "margin_db", "seed", "pre_fec_ber", "post_fec_ber", "ser", "evm_percent"];
const CSV_TAIL_COLUMNS: [&str; 5] = ["bit_count", "error_count", "elapsed_seconds", "config_digest", "failure"];

fn iteration_columns(depth: usize) -> Vec<String> {
    (1..=depth).map(|k| format!("iter_ber_{k}")).collect()
}

fn iteration_cells(values: &[f64], depth: usize) -> Vec<String> {
    (0..depth).map(|k| values.get(k).map(|v| v.to_string()).unwrap_or_default()).collect()
}

/// Writes one row per trial.
pub fn write_csv<W: Write>(out: W, records: &[MetricsRecord]) -> Result<()> {
    let depth = records.iter().map(|r| r.per_iteration_ber.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = CSV_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(iteration_columns(depth));
    header.extend(CSV_TAIL_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.format.name().to_string(),
            r.power_margin_db.to_string(),
            r.seed.to_string(),
            r.pre_fec_ber.to_string(),
            r.post_fec_ber.to_string(),
            r.ser.to_string(),
            r.evm_percent.to_string(),
        ];
        row.extend(iteration_cells(&r.per_iteration_ber, depth));
        row.extend([
            r.bit_count.to_string(),
            r.error_count.to_string(),
            r.elapsed_seconds.to_string(),
            r.config_digest.clone(),
            r.failure.clone().unwrap_or_default(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(cell: &str, column: &str) -> Result<T> {
    cell.parse().map_err(|_| Error::Io(format!("bad value {cell:?} in column {column}")))
}

/// Reads trial rows written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Io(format!("missing column {name}")))
    };
    let fixed: Vec<usize> = CSV_FIXED_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let tail: Vec<usize> = CSV_TAIL_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let mut iters: Vec<(usize, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix("iter_ber_").and_then(|k| k.parse().ok()).map(|k: usize| (k, i)))
        .collect();
    iters.sort();
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let cell = |i: usize| row.get(i).unwrap_or("");
        let format: Format = cell(fixed[0]).parse()?;
        let mut per_iteration_ber = Vec::new();
        for &(_, i) in &iters {
            if cell(i).is_empty() {
                break;
            }
            per_iteration_ber.push(parse(cell(i), "iter_ber")?);
        }
        let failure = cell(tail[4]);
        records.push(MetricsRecord {
            format,
            power_margin_db: parse(cell(fixed[1]), "margin_db")?,
            seed: parse(cell(fixed[2]), "seed")?,
            pre_fec_ber: parse(cell(fixed[3]), "pre_fec_ber")?,
            post_fec_ber: parse(cell(fixed[4]), "post_fec_ber")?,
            ser: parse(cell(fixed[5]), "ser")?,
            evm_percent: parse(cell(fixed[6]), "evm_percent")?,
            per_iteration_ber,
            bit_count: parse(cell(tail[0]), "bit_count")?,
            error_count: parse(cell(tail[1]), "error_count")?,
            elapsed_seconds: parse(cell(tail[2]), "elapsed_seconds")?,
            config_digest: cell(tail[3]).to_string(),
            failure: (!failure.is_empty()).then(|| failure.to_string()),
        });
    }
    Ok(records)
}

/// Writes one row per (format, margin) from seed-averaged sweep points.
pub fn write_summary_csv<W: Write>(out: W, rows: &[(Format, SweepPoint)]) -> Result<()> {
    let depth = rows.iter().map(|(_, p)| p.per_iteration_ber.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["format", "margin_db", "trials", "failures", "pre_fec_ber", "post_fec_ber", "ser", "evm_percent"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(iteration_columns(depth));
    header.extend(["bit_count".to_string(), "error_count".to_string()]);
    w.write_record(&header)?;
    for (f, p) in rows {
        let mut row = vec![
            f.name().to_string(),
            p.margin_db.to_string(),
            p.trials.to_string(),
            p.failures.to_string(),
            p.pre_fec_ber.to_string(),
            p.post_fec_ber.to_string(),
            p.ser.to_string(),
            p.evm_percent.to_string(),
        ];
        row.extend(iteration_cells(&p.per_iteration_ber, depth));
        row.extend([p.bit_count.to_string(), p.error_count.to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
