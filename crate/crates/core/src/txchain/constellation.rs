use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping::ShapingSpec;
use crate::sigkit::C64;

/// Points with their probabilities and, for mapped formats, bit labels.
///
/// For square QAM the point index *is* its label: the I Gray label in the
/// high bits and the Q Gray label in the low bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub points: Vec<C64>,
    pub probabilities: Vec<f64>,
    /// `Some(bits per symbol)` when `points[label]` is the mapping.
    pub bits_per_symbol: Option<usize>,
    /// Per-dimension levels (normalized), present for square QAM.
    pub pam_levels: Option<Vec<f64>>,
}

/// Inverse of the binary-reflected Gray code.
pub fn gray_decode(g: usize) -> usize {
    let mut idx = g;
    let mut shift = g >> 1;
    while shift != 0 {
        idx ^= shift;
        shift >>= 1;
    }
    idx
}

impl Constellation {
    /// Uniform square `order`-QAM with unit mean energy.
    pub fn square_qam(order: usize) -> Result<Self> {
        let side = Self::side(order)?;
        Self::square_qam_with_level_probabilities(order, &vec![1.0 / side as f64; side])
    }

    /// Square QAM whose I and Q levels (ascending) are drawn independently
    /// with `level_probs`; unit mean energy under those probabilities.
    pub fn square_qam_with_level_probabilities(order: usize, level_probs: &[f64]) -> Result<Self> {
        let side = Self::side(order)?;
        if level_probs.len() != side {
            return Err(Error::param(format!("expected {side} level probabilities")));
        }
        let raw: Vec<f64> = (0..side).map(|i| 2.0 * i as f64 - (side as f64 - 1.0)).collect();
        let energy_1d: f64 = raw.iter().zip(level_probs).map(|(a, p)| p * a * a).sum();
        let scale = 1.0 / (2.0 * energy_1d).sqrt();
        let levels: Vec<f64> = raw.iter().map(|a| a * scale).collect();
        let m = side.trailing_zeros() as usize;
        let mut points = vec![C64::new(0.0, 0.0); order];
        let mut probabilities = vec![0.0; order];
        for gi in 0..side {
            for gq in 0..side {
                let (ii, iq) = (gray_decode(gi), gray_decode(gq));
                let label = (gi << m) | gq;
                points[label] = C64::new(levels[ii], levels[iq]);
                probabilities[label] = level_probs[ii] * level_probs[iq];
            }
        }
        Ok(Self { points, probabilities, bits_per_symbol: Some(2 * m), pam_levels: Some(levels) })
    }

    /// PCS square QAM from a solved amplitude distribution: each signed level
    /// takes half the probability of its amplitude.
    pub fn shaped_qam(spec: &ShapingSpec) -> Result<Self> {
        let na = spec.amplitude_alphabet.len();
        let side = 2 * na;
        let mut level_probs = vec![0.0; side];
        for i in 0..side {
            // level index i -> amplitude index of |2i - (side-1)|
            let a = if i < na { na - 1 - i } else { i - na };
            level_probs[i] = spec.probabilities[a] / 2.0;
        }
        Self::square_qam_with_level_probabilities(side * side, &level_probs)
    }

    fn side(order: usize) -> Result<usize> {
        let side = (order as f64).sqrt().round() as usize;
        if side * side != order || !side.is_power_of_two() || side < 2 {
            return Err(Error::param(format!("{order}-QAM is not a square power-of-two constellation")));
        }
        Ok(side)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().zip(&self.probabilities).map(|(x, p)| p * x.norm_sqr()).sum()
    }

    /// Index of the closest point.
    pub fn nearest(&self, y: C64) -> usize {
        if let (Some(levels), Some(bps)) = (&self.pam_levels, self.bits_per_symbol) {
            let m = bps / 2;
            let slice = |v: f64| -> usize {
                let step = levels[1] - levels[0];
                let i = ((v - levels[0]) / step).round();
                i.clamp(0.0, (levels.len() - 1) as f64) as usize
            };
            let (ii, iq) = (slice(y.re), slice(y.im));
            return ((ii ^ (ii >> 1)) << m) | (iq ^ (iq >> 1));
        }
        self.points
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - y).norm_sqr().partial_cmp(&(b.1 - y).norm_sqr()).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Gray-mapped square QAM: `bits_per_symbol` bits per symbol, MSB first.
pub fn qam_map(bits: &[u8], constellation: &Constellation) -> Result<Vec<C64>> {
    let bps = constellation
        .bits_per_symbol
        .ok_or_else(|| Error::param("constellation has no bit labels"))?;
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::param(format!("{} bits is not a multiple of {bps}", bits.len())));
    }
    Ok(bits
        .chunks(bps)
        .map(|c| {
            let label = c.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
            constellation.points[label]
        })
        .collect())
}
