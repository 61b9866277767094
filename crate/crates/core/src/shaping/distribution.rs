use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the energy exponent the distribution favors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapingFamily {
    /// p(a) ∝ exp(-λa²): low amplitudes favored.
    MaxwellBoltzmann,
    /// p(a) ∝ exp(+λa²): high amplitudes favored.
    InverseMaxwellBoltzmann,
}

/// A solved per-dimension amplitude distribution and its CCDM composition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapingSpec {
    pub family: ShapingFamily,
    /// Sorted positive amplitudes, e.g. `[1, 3, 5, 7]`.
    pub amplitude_alphabet: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Magnitude of the exponent; the sign comes from `family`.
    pub lambda: f64,
    /// Bits per 2D symbol, counting the two sign bits.
    pub target_entropy_2d: f64,
    pub block_len: usize,
    pub composition: Vec<usize>,
}

impl ShapingSpec {
    /// Per-dimension amplitude entropy in bits.
    pub fn amplitude_entropy(&self) -> f64 {
        entropy_bits(&self.probabilities)
    }

    /// 2D entropy: two amplitudes plus two uniform sign bits.
    pub fn entropy_2d(&self) -> f64 {
        2.0 * (self.amplitude_entropy() + 1.0)
    }

    /// E[a²] per dimension under the solved probabilities.
    pub fn mean_energy(&self) -> f64 {
        self.amplitude_alphabet.iter().zip(&self.probabilities).map(|(a, p)| p * a * a).sum()
    }

    /// Replaces the composition with one for a new block length.
    pub fn with_block_len(mut self, block_len: usize) -> Result<Self> {
        self.composition = composition_for(&self, block_len)?;
        self.block_len = block_len;
        Ok(self)
    }
}

/// Shannon entropy in bits; zero-probability entries contribute nothing.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

pub const DEFAULT_BLOCK_LEN: usize = 96;

fn probabilities(alphabet: &[f64], signed_lambda: f64) -> Vec<f64> {
    // log-sum-exp keeps large |λ| finite
    let logits: Vec<f64> = alphabet.iter().map(|a| -signed_lambda * a * a).collect();
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn solve(alphabet: &[f64], target_entropy_2d: f64, family: ShapingFamily) -> Result<ShapingSpec> {
    if alphabet.len() < 2 {
        return Err(Error::param("amplitude alphabet needs at least two entries"));
    }
    if alphabet.iter().any(|&a| !(a > 0.0)) || alphabet.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("amplitude alphabet must be positive and strictly increasing"));
    }
    let max = 2.0 + 2.0 * (alphabet.len() as f64).log2();
    if !(target_entropy_2d > 2.0 && target_entropy_2d <= max + 1e-12) {
        return Err(Error::param(format!(
            "target 2D entropy {target_entropy_2d} outside achievable range (2, {max}]"
        )));
    }
    let target_amp = target_entropy_2d / 2.0 - 1.0;
    let sign = match family {
        ShapingFamily::MaxwellBoltzmann => 1.0,
        ShapingFamily::InverseMaxwellBoltzmann => -1.0,
    };
    let entropy_at = |lambda: f64| entropy_bits(&probabilities(alphabet, sign * lambda));

    let lambda = if (target_amp - (alphabet.len() as f64).log2()).abs() < 1e-12 {
        0.0
    } else {
        // entropy falls monotonically as λ grows
        let mut hi = 1e-3;
        while entropy_at(hi) > target_amp {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::param("entropy target not reachable"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if entropy_at(mid) > target_amp {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let probabilities = probabilities(alphabet, sign * lambda);
    let mut spec = ShapingSpec {
        family,
        amplitude_alphabet: alphabet.to_vec(),
        probabilities,
        lambda,
        target_entropy_2d,
        block_len: DEFAULT_BLOCK_LEN,
        composition: Vec::new(),
    };
    spec.composition = composition_for(&spec, DEFAULT_BLOCK_LEN)?;
    Ok(spec)
}

/// Maxwell-Boltzmann amplitudes hitting `target_entropy_2d` bits per 2D symbol.
pub fn solve_mb(amplitude_alphabet: &[f64], target_entropy_2d: f64) -> Result<ShapingSpec> {
    solve(amplitude_alphabet, target_entropy_2d, ShapingFamily::MaxwellBoltzmann)
}

/// Inverse Maxwell-Boltzmann amplitudes hitting the same kind of target.
pub fn solve_ivmb(amplitude_alphabet: &[f64], target_entropy_2d: f64) -> Result<ShapingSpec> {
    solve(amplitude_alphabet, target_entropy_2d, ShapingFamily::InverseMaxwellBoltzmann)
}

/// Largest-remainder quantization of the probabilities to `block_len` counts.
///
/// Ties in the remainder go to the smaller amplitude.
pub fn composition_for(spec: &ShapingSpec, block_len: usize) -> Result<Vec<usize>> {
    let m = spec.probabilities.len();
    if block_len < m {
        return Err(Error::param(format!("block length {block_len} shorter than alphabet size {m}")));
    }
    let exact: Vec<f64> = spec.probabilities.iter().map(|p| p * block_len as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..m).collect();
    // stable sort keeps lower index first among equal remainders
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &i in order.iter().take(block_len.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    Ok(counts)
}
