use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::LinkConfig;
use super::trial::{run_trial, MetricsRecord};
use crate::error::{Error, Result};

/// Seed-averaged statistics at one margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub margin_db: f64,
    pub trials: usize,
    pub failures: usize,
    pub pre_fec_ber: f64,
    pub post_fec_ber: f64,
    pub ser: f64,
    /// Mean over trials that produced an EVM; NaN if none did.
    pub evm_percent: f64,
    /// Mean BER after each turbo iteration, over trials that report it.
    pub per_iteration_ber: Vec<f64>,
    pub bit_count: usize,
    pub error_count: usize,
}

/// Margin read-out from a BER curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MarginEstimate {
    Measured(f64),
    /// The threshold is not crossed between any two adjacent sweep points.
    NotMeasurable,
}

impl MarginEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            MarginEstimate::Measured(m) => Some(m),
            MarginEstimate::NotMeasurable => None,
        }
    }
}

/// Runs every (margin, seed) pair in parallel. Records come back ordered by
/// margin, then seed, regardless of scheduling.
pub fn sweep(config: &LinkConfig, margins: &[f64], seeds: &[u64]) -> Result<Vec<MetricsRecord>> {
    if margins.is_empty() || seeds.is_empty() {
        return Err(Error::param("a sweep needs at least one margin and one seed"));
    }
    config.validate()?;
    let jobs: Vec<(f64, u64)> = margins.iter().flat_map(|&m| seeds.iter().map(move |&s| (m, s))).collect();
    Ok(jobs.par_iter().map(|&(m, s)| run_trial(config, m, s)).collect())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Groups records by margin (ascending) and averages over seeds.
pub fn summarize(records: &[MetricsRecord]) -> Vec<SweepPoint> {
    let mut margins: Vec<f64> = records.iter().map(|r| r.power_margin_db).collect();
    margins.sort_by(f64::total_cmp);
    margins.dedup();
    margins
        .into_iter()
        .map(|m| {
            let group: Vec<&MetricsRecord> = records.iter().filter(|r| r.power_margin_db == m).collect();
            let depth = group.iter().map(|r| r.per_iteration_ber.len()).max().unwrap_or(0);
            let per_iteration_ber = (0..depth)
                .map(|i| mean(group.iter().filter_map(|r| r.per_iteration_ber.get(i).copied())))
                .collect();
            SweepPoint {
                margin_db: m,
                trials: group.len(),
                failures: group.iter().filter(|r| r.failure.is_some()).count(),
                pre_fec_ber: mean(group.iter().map(|r| r.pre_fec_ber)),
                post_fec_ber: mean(group.iter().map(|r| r.post_fec_ber)),
                ser: mean(group.iter().map(|r| r.ser)),
                evm_percent: mean(group.iter().map(|r| r.evm_percent).filter(|v| v.is_finite())),
                per_iteration_ber,
                bit_count: group.iter().map(|r| r.bit_count).sum(),
                error_count: group.iter().map(|r| r.error_count).sum(),
            }
        })
        .collect()
}

/// Margin at which the post-FEC BER curve crosses `ber_threshold`.
///
/// A point with no errors is placed at half an error over its bit count so
/// the log scale stays finite.
pub fn margin_at_ber(points: &[SweepPoint], ber_threshold: f64) -> MarginEstimate {
    let curve: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let floor = 0.5 / p.bit_count.max(1) as f64;
            (p.margin_db, if p.post_fec_ber > 0.0 { p.post_fec_ber } else { floor })
        })
        .collect();
    interpolate_margin(&curve, ber_threshold)
}

/// Log-linear inversion of a `(margin, ber)` curve sorted by margin. All BERs
/// must be positive.
pub fn interpolate_margin(curve: &[(f64, f64)], ber_threshold: f64) -> MarginEstimate {
    if !(ber_threshold > 0.0) {
        return MarginEstimate::NotMeasurable;
    }
    let t = ber_threshold.log10();
    for &(m, b) in curve {
        if b == ber_threshold {
            return MarginEstimate::Measured(m);
        }
    }
    for w in curve.windows(2) {
        let ((m0, b0), (m1, b1)) = (w[0], w[1]);
        if b0 <= 0.0 || b1 <= 0.0 {
            continue;
        }
        let (l0, l1) = (b0.log10(), b1.log10());
        if (l0 - t) * (l1 - t) < 0.0 {
            return MarginEstimate::Measured(m0 + (t - l0) * (m1 - m0) / (l1 - l0));
        }
    }
    MarginEstimate::NotMeasurable
}
