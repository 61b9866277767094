use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigkit::C64;

/// Symbol-level frame structure and pilot placement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameLayout {
    pub preamble_len: usize,
    /// Payload symbols; the harness fills this from the info-bit budget.
    pub payload_len: usize,
    /// Pilot offset from the carrier in Hz.
    pub pilot_tone_freq: f64,
    /// Pilot power relative to the signal in dB; `None` disables the pilot.
    pub pilot_tone_power_ratio: Option<f64>,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self { preamble_len: 512, payload_len: 0, pilot_tone_freq: 25e9, pilot_tone_power_ratio: Some(-12.0) }
    }
}

pub const MIN_PREAMBLE_LEN: usize = 64;

/// Seeded unit-modulus QPSK sequence.
pub fn qpsk_preamble(len: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let i = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let q = if rng.random::<bool>() { 1.0 } else { -1.0 };
            C64::new(i, q) * FRAC_1_SQRT_2
        })
        .collect()
}

/// Prepends the seeded QPSK preamble; returns the frame and the preamble.
pub fn build_frame(payload_symbols: &[C64], layout: &FrameLayout, seed: u64) -> Result<(Vec<C64>, Vec<C64>)> {
    if layout.preamble_len < MIN_PREAMBLE_LEN {
        return Err(Error::config(format!("preamble must be at least {MIN_PREAMBLE_LEN} symbols")));
    }
    if payload_symbols.len() != layout.payload_len {
        return Err(Error::param(format!(
            "payload has {} symbols, layout expects {}",
            payload_symbols.len(),
            layout.payload_len
        )));
    }
    let preamble = qpsk_preamble(layout.preamble_len, seed);
    let mut symbols = preamble.clone();
    symbols.extend_from_slice(payload_symbols);
    Ok((symbols, preamble))
}
