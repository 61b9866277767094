//! Probabilistic amplitude shaping around the systematic convolutional code.
//!
//! A frame holds `n_blocks` CCDM blocks, so `D = n_blocks·block_len`
//! amplitudes and as many sign positions, two of each per 2D symbol.
//! The systematic part of the code is every amplitude label bit plus `S` sign
//! bits that carry information directly; the redundancy fills the next sign
//! positions and anything left over is frozen to zero. `S` is the largest
//! value for which the redundancy still fits.

use super::ccdm::{ccdm_dematch, ccdm_info_bits, ccdm_match};
use super::distribution::ShapingSpec;
use crate::error::{Error, Result};
use crate::sigkit::C64;
use crate::turbo::{FecCodec, Interleaver};
use crate::txchain::Constellation;

/// LLR magnitude given to hard symbol decisions.
const HARD_LLR: f64 = 8.0;

/// Frame geometry, the code and the seeded bit placements.
#[derive(Clone, Debug)]
pub struct PasLayout {
    spec: ShapingSpec,
    n_blocks: usize,
    amp_bits: usize,
    ccdm_bits: usize,
    sign_info: usize,
    codec: FecCodec,
    /// Order of the systematic bits along the code trellis.
    trellis_order: Interleaver,
    /// Sign positions: first `sign_info` carry info, then the redundancy.
    sign_slots: Interleaver,
}

/// Encoded frame: constellation labels (I label high, Q label low).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PasFrame {
    pub labels: Vec<usize>,
}

/// What the demapper hands to [`pas_decode`].
#[derive(Clone, Debug)]
pub enum PasInput {
    /// Bit LLRs, `bits_per_symbol` per symbol in label order.
    Llrs(Vec<f64>),
    /// Hard constellation labels.
    Symbols(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PasDecoded {
    pub info_bits: Vec<u8>,
    /// CCDM blocks whose decoded amplitudes violated the composition;
    /// their bits are returned as zeros.
    pub block_errors: usize,
}

impl PasLayout {
    pub fn new(spec: &ShapingSpec, n_blocks: usize, puncture_period: usize, seed: u64) -> Result<Self> {
        let na = spec.amplitude_alphabet.len();
        if !na.is_power_of_two() || na < 2 {
            return Err(Error::config("PAS needs a power-of-two amplitude alphabet"));
        }
        if n_blocks == 0 {
            return Err(Error::param("PAS frame needs at least one CCDM block"));
        }
        if spec.composition.iter().sum::<usize>() != spec.block_len {
            return Err(Error::param("composition does not sum to block_len"));
        }
        let amp_bits = na.trailing_zeros() as usize;
        let d = n_blocks * spec.block_len;
        if !d.is_multiple_of(2) {
            return Err(Error::config("PAS frame needs an even number of amplitudes"));
        }
        let fits = |s: usize| -> Result<bool> {
            let codec = FecCodec::new(amp_bits * d + s, puncture_period, 0)?;
            Ok(codec.redundancy_len() + s <= d)
        };
        if !fits(0)? {
            return Err(Error::config(format!(
                "FEC redundancy of a rate {puncture_period}/{} code exceeds the {d} sign positions",
                puncture_period + 1
            )));
        }
        // fits() is monotone in s; binary search for the largest feasible s
        let (mut lo, mut hi) = (0usize, d);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if fits(mid)? {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let sign_info = lo;
        let k = amp_bits * d + sign_info;
        Ok(Self {
            spec: spec.clone(),
            n_blocks,
            amp_bits,
            ccdm_bits: ccdm_info_bits(&spec.composition),
            sign_info,
            codec: FecCodec::new(k, puncture_period, seed)?,
            trellis_order: Interleaver::new(k, seed ^ 0x5eed_0001),
            sign_slots: Interleaver::new(d, seed ^ 0x5eed_0002),
        })
    }

    pub fn spec(&self) -> &ShapingSpec {
        &self.spec
    }

    pub fn codec(&self) -> &FecCodec {
        &self.codec
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Amplitudes (and sign positions) per frame.
    pub fn amplitudes(&self) -> usize {
        self.n_blocks * self.spec.block_len
    }

    pub fn symbols(&self) -> usize {
        self.amplitudes() / 2
    }

    pub fn sign_info_bits(&self) -> usize {
        self.sign_info
    }

    pub fn frozen_sign_bits(&self) -> usize {
        self.amplitudes() - self.sign_info - self.codec.redundancy_len()
    }

    /// Info bits carried per frame.
    pub fn info_len(&self) -> usize {
        self.n_blocks * self.ccdm_bits + self.sign_info
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * (self.amp_bits + 1)
    }

    pub fn info_bits_per_symbol(&self) -> f64 {
        self.info_len() as f64 / self.symbols() as f64
    }

    /// Label of amplitude index `a` inside a PAM label whose MSB is the sign.
    fn amp_label(&self, a: usize) -> usize {
        let na = 1 << self.amp_bits;
        let i = na + a;
        (i ^ (i >> 1)) & (na - 1)
    }

    fn amp_from_label(&self, label: usize) -> usize {
        let na = 1 << self.amp_bits;
        let g = na | label;
        let mut i = g;
        let mut s = g >> 1;
        while s != 0 {
            i ^= s;
            s >>= 1;
        }
        i - na
    }

    /// Bit position of amplitude/sign slot `j` inside the frame's label bits.
    fn slot_bit_offset(&self, j: usize) -> usize {
        let per_dim = self.amp_bits + 1;
        (j / 2) * 2 * per_dim + (j % 2) * per_dim
    }
}

/// Shapes, encodes and labels one frame of `layout.info_len()` bits.
pub fn pas_encode(info_bits: &[u8], layout: &PasLayout) -> Result<PasFrame> {
    if info_bits.len() != layout.info_len() {
        return Err(Error::param(format!(
            "PAS frame takes {} info bits, got {}",
            layout.info_len(),
            info_bits.len()
        )));
    }
    let d = layout.amplitudes();
    let m = layout.amp_bits;
    let kc = layout.ccdm_bits;
    let mut amps = Vec::with_capacity(d);
    for b in 0..layout.n_blocks {
        amps.extend(ccdm_match(&info_bits[b * kc..(b + 1) * kc], &layout.spec.composition)?);
    }
    let sign_info = &info_bits[layout.n_blocks * kc..];

    let mut systematic = Vec::with_capacity(m * d + sign_info.len());
    for &a in &amps {
        let lab = layout.amp_label(a);
        systematic.extend((0..m).rev().map(|i| ((lab >> i) & 1) as u8));
    }
    systematic.extend_from_slice(sign_info);
    let redundancy = layout.codec.encode_redundancy(&layout.trellis_order.interleave(&systematic))?;

    let slots = layout.sign_slots.permutation();
    let mut signs = vec![0u8; d];
    for (i, &b) in sign_info.iter().chain(&redundancy).enumerate() {
        signs[slots[i]] = b;
    }
    let labels = (0..d / 2)
        .map(|s| {
            let dim = |j: usize| (signs[j] as usize) << m | layout.amp_label(amps[j]);
            dim(2 * s) << (m + 1) | dim(2 * s + 1)
        })
        .collect();
    Ok(PasFrame { labels })
}

/// Bit LLRs (ln P0/P1) of received symbols under the shaped priors.
///
/// `noise_var` is the complex noise variance for the unit-energy
/// constellation, split equally over I and Q.
pub fn pas_demap_llrs(received: &[C64], layout: &PasLayout, noise_var: f64) -> Result<Vec<f64>> {
    if noise_var <= 0.0 {
        return Err(Error::param("noise variance must be positive"));
    }
    let constellation = Constellation::shaped_qam(&layout.spec)?;
    let levels = constellation.pam_levels.expect("square constellation has levels");
    let na = layout.spec.amplitude_alphabet.len();
    let priors: Vec<f64> = (0..levels.len())
        .map(|i| {
            let a = if i < na { na - 1 - i } else { i - na };
            (layout.spec.probabilities[a] / 2.0).max(1e-300).ln()
        })
        .collect();
    let bits = layout.amp_bits + 1;
    let var = noise_var / 2.0;
    let mut out = Vec::with_capacity(received.len() * 2 * bits);
    let mut metrics = vec![0.0; levels.len()];
    for y in received {
        for v in [y.re, y.im] {
            for (i, l) in levels.iter().enumerate() {
                metrics[i] = priors[i] - (v - l) * (v - l) / (2.0 * var);
            }
            for b in (0..bits).rev() {
                let (mut l0, mut l1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for (i, &mt) in metrics.iter().enumerate() {
                    if ((i ^ (i >> 1)) >> b) & 1 == 0 {
                        l0 = crate::turbo::llr::max_star(l0, mt);
                    } else {
                        l1 = crate::turbo::llr::max_star(l1, mt);
                    }
                }
                out.push(crate::turbo::llr::clamp_llr(l0 - l1));
            }
        }
    }
    Ok(out)
}

/// Decodes the code, then dematches each CCDM block.
pub fn pas_decode(input: &PasInput, layout: &PasLayout) -> Result<PasDecoded> {
    let d = layout.amplitudes();
    let m = layout.amp_bits;
    let bps = layout.bits_per_symbol();
    let llrs: Vec<f64> = match input {
        PasInput::Llrs(l) => l.clone(),
        PasInput::Symbols(labels) => labels
            .iter()
            .flat_map(|&lab| (0..bps).rev().map(move |i| if (lab >> i) & 1 == 0 { HARD_LLR } else { -HARD_LLR }))
            .collect(),
    };
    if llrs.len() != layout.symbols() * bps {
        return Err(Error::param(format!(
            "PAS frame needs {} bit LLRs, got {}",
            layout.symbols() * bps,
            llrs.len()
        )));
    }
    let sign_llr = |j: usize| llrs[layout.slot_bit_offset(j)];
    let mut systematic = Vec::with_capacity(layout.codec.info_len());
    for j in 0..d {
        let off = layout.slot_bit_offset(j) + 1;
        systematic.extend_from_slice(&llrs[off..off + m]);
    }
    let slots = layout.sign_slots.permutation();
    systematic.extend((0..layout.sign_info).map(|i| sign_llr(slots[i])));
    let mut codeword = layout.trellis_order.interleave(&systematic);
    let redundancy = layout.codec.redundancy_len();
    codeword.extend((0..redundancy).map(|i| sign_llr(slots[layout.sign_info + i])));

    let decoded = layout.codec.decode_codeword(&codeword, None)?;
    let systematic_bits = layout.trellis_order.deinterleave(&decoded.info_bits);

    let kc = layout.ccdm_bits;
    let mut info_bits = Vec::with_capacity(layout.info_len());
    let mut block_errors = 0;
    for b in 0..layout.n_blocks {
        let amps: Vec<usize> = (b * layout.spec.block_len..(b + 1) * layout.spec.block_len)
            .map(|j| {
                let lab = systematic_bits[j * m..(j + 1) * m].iter().fold(0usize, |acc, &x| (acc << 1) | x as usize);
                layout.amp_from_label(lab)
            })
            .collect();
        match ccdm_dematch(&amps, &layout.spec.composition) {
            Ok(bits) => info_bits.extend(bits),
            Err(_) => {
                block_errors += 1;
                info_bits.extend(std::iter::repeat_n(0u8, kc));
            }
        }
    }
    info_bits.extend_from_slice(&systematic_bits[m * d..]);
    Ok(PasDecoded { info_bits, block_errors })
}
