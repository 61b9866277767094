use crate::error::{Error, Result};
use crate::ptprdfe::PrTarget;
use crate::sigkit::{FirFilter, C64};

pub const MIN_POST_FILTER_SYMBOLS: usize = 10_000;
const ETA_LIMIT: f64 = 0.9;

/// One-tap linear-prediction whitener `[1, eta]` and its effect.
#[derive(Clone, Debug)]
pub struct PostFilterEstimate {
    pub filter: FirFilter,
    pub eta: f64,
    /// Normalized lag-1 autocorrelation of the residual before filtering.
    pub lag1_before: f64,
    /// Same quantity after filtering the residual with `[1, eta]`.
    pub lag1_after: f64,
}

/// Normalized lag-1 autocorrelation `Re R(1) / R(0)`.
pub fn lag1_correlation(x: &[C64]) -> f64 {
    let r0: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if r0 == 0.0 {
        return 0.0;
    }
    let r1: f64 = x.windows(2).map(|w| (w[1] * w[0].conj()).re).sum();
    r1 / r0
}

/// Causal filtering `z[k] = sum_m h[m] x[k - m]` of a symbol-rate sequence.
pub fn apply_causal(x: &[C64], taps: &[f64]) -> Vec<C64> {
    (0..x.len())
        .map(|k| {
            taps.iter()
                .enumerate()
                .filter(|(m, _)| *m <= k)
                .map(|(m, &h)| x[k - m] * h)
                .sum()
        })
        .collect()
}

/// Estimates the whitening post-filter from equalizer output `pr_symbols`
/// and its partial-response reference `pr_reference`.
pub fn estimate_post_filter(pr_symbols: &[C64], pr_reference: &[C64]) -> Result<PostFilterEstimate> {
    if pr_symbols.len() != pr_reference.len() {
        return Err(Error::param("equalizer output and reference lengths differ"));
    }
    if pr_symbols.len() < MIN_POST_FILTER_SYMBOLS {
        return Err(Error::param(format!(
            "post-filter estimation needs {MIN_POST_FILTER_SYMBOLS} symbols, got {}",
            pr_symbols.len()
        )));
    }
    let residual: Vec<C64> = pr_symbols.iter().zip(pr_reference).map(|(y, d)| y - d).collect();
    let before = lag1_correlation(&residual);
    let eta = (-before).clamp(-ETA_LIMIT, ETA_LIMIT);
    let filter = FirFilter::causal(vec![1.0, eta])?;
    let after = lag1_correlation(&apply_causal(&residual, &filter.taps));
    Ok(PostFilterEstimate { filter, eta, lag1_before: before, lag1_after: after })
}

/// `h_SD = h_PR * h_PF`.
pub fn effective_filter(h_pr: &PrTarget, h_pf: &FirFilter) -> FirFilter {
    FirFilter::causal(h_pr.taps().to_vec())
        .expect("partial-response target is never empty")
        .convolve(&FirFilter { taps: h_pf.taps.clone(), reference_delay: 0 })
}
