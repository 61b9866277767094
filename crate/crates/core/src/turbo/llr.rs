//! Log-likelihood ratio helpers.
//!
//! LLRs follow `L = ln P(b = 0) / P(b = 1)`: positive favors a zero bit.

use serde::{Deserialize, Serialize};

/// Output LLRs never exceed this magnitude.
pub const LLR_CLAMP: f64 = 30.0;

/// How the forward-backward recursions combine paths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapAlgorithm {
    /// Exact Jacobian logarithm.
    #[default]
    LogMap,
    /// Max-log approximation.
    MaxLog,
}

impl MapAlgorithm {
    #[inline]
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            MapAlgorithm::LogMap => max_star(a, b),
            MapAlgorithm::MaxLog => a.max(b),
        }
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[inline]
pub fn clamp_llr(l: f64) -> f64 {
    l.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// Log-domain weight a bit value receives from its LLR, up to a constant.
#[inline]
pub fn bit_metric(bit: u8, llr: f64) -> f64 {
    if bit == 0 {
        0.5 * llr
    } else {
        -0.5 * llr
    }
}

#[inline]
pub fn hard_bit(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}
