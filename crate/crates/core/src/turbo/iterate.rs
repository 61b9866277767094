//! The iterative exchange between the ISI detector and the FEC decoder.
//!
//! Both the detector and the decoder work on bits of the original 16QAM
//! symbols, so their extrinsic outputs can be exchanged through the coded-bit
//! interleaver without any re-mapping.

use super::detector::bcjr_detect_with;
use super::fec::FecCodec;
use super::llr::{hard_bit, MapAlgorithm, LLR_CLAMP};
use super::trellis::TrellisSpec;
use crate::error::{Error, Result};

/// Outcome of a turbo equalization run.
#[derive(Clone, Debug)]
pub struct TurboOutput {
    pub info_bits: Vec<u8>,
    /// Info-bit BER after each iteration; empty without a reference.
    pub iteration_ber: Vec<f64>,
    /// Channel-order hard decisions on the coded bits from the first
    /// detector pass (no decoder feedback yet).
    pub first_pass_coded_bits: Vec<u8>,
}

/// Turbo equalizer for one FEC block carried by I/Q PAM dimensions.
///
/// Channel-order coded bits are packed `bits_per_symbol` for I then
/// `bits_per_symbol` for Q per 2D symbol; the last symbol is zero padded.
#[derive(Clone, Debug)]
pub struct TurboEqualizer<'a> {
    trellis: &'a TrellisSpec,
    codec: &'a FecCodec,
    reference: Option<&'a [u8]>,
    algorithm: MapAlgorithm,
}

impl<'a> TurboEqualizer<'a> {
    pub fn new(trellis: &'a TrellisSpec, codec: &'a FecCodec) -> Self {
        Self { trellis, codec, reference: None, algorithm: MapAlgorithm::LogMap }
    }

    /// Registers transmitted info bits so every iteration reports its BER.
    pub fn with_reference(mut self, info_bits: &'a [u8]) -> Self {
        self.reference = Some(info_bits);
        self
    }

    pub fn with_algorithm(mut self, algorithm: MapAlgorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    /// Number of 2D symbols needed for one codeword.
    pub fn symbols_per_block(trellis: &TrellisSpec, codec: &FecCodec) -> usize {
        codec.coded_len().div_ceil(2 * trellis.bits_per_symbol())
    }

    pub fn run(&self, i_samples: &[f64], q_samples: &[f64], noise_var: f64, n_iter: usize) -> Result<TurboOutput> {
        if n_iter == 0 {
            return Err(Error::param("turbo equalization needs at least one iteration"));
        }
        let bps = self.trellis.bits_per_symbol();
        let n_sym = Self::symbols_per_block(self.trellis, self.codec);
        if i_samples.len() != n_sym || q_samples.len() != n_sym {
            return Err(Error::param(format!(
                "codeword needs {n_sym} symbols per dimension, got {}/{}",
                i_samples.len(),
                q_samples.len()
            )));
        }
        if let Some(r) = self.reference {
            if r.len() != self.codec.info_len() {
                return Err(Error::param("reference length differs from FEC info length"));
            }
        }
        let coded = self.codec.coded_len();
        let padded = n_sym * 2 * bps;
        // padding bits are known zeros
        let mut priors = vec![LLR_CLAMP; padded];
        priors[..coded].fill(0.0);

        let mut i_prior = vec![0.0; n_sym * bps];
        let mut q_prior = vec![0.0; n_sym * bps];
        let mut channel = vec![0.0; padded];
        let mut iteration_ber = Vec::with_capacity(n_iter);
        let mut first_pass = Vec::new();
        let mut info_bits = Vec::new();

        for it in 0..n_iter {
            for k in 0..n_sym {
                for b in 0..bps {
                    i_prior[k * bps + b] = priors[k * 2 * bps + b];
                    q_prior[k * bps + b] = priors[k * 2 * bps + bps + b];
                }
            }
            let (i_ext, q_ext) = rayon::join(
                || bcjr_detect_with(i_samples, self.trellis, &i_prior, noise_var, self.algorithm),
                || bcjr_detect_with(q_samples, self.trellis, &q_prior, noise_var, self.algorithm),
            );
            let (i_ext, q_ext) = (i_ext?, q_ext?);
            for k in 0..n_sym {
                for b in 0..bps {
                    channel[k * 2 * bps + b] = i_ext[k * bps + b];
                    channel[k * 2 * bps + bps + b] = q_ext[k * bps + b];
                }
            }
            if it == 0 {
                first_pass = channel[..coded].iter().map(|&l| hard_bit(l)).collect();
            }
            let decoder_in = self.codec.interleaver().deinterleave(&channel[..coded]);
            let dec = self.codec.decode_codeword(&decoder_in, None)?;
            if let Some(r) = self.reference {
                let errors = dec.info_bits.iter().zip(r).filter(|(a, b)| a != b).count();
                iteration_ber.push(errors as f64 / r.len() as f64);
            }
            info_bits = dec.info_bits;
            if it + 1 < n_iter {
                let fed_back = self.codec.interleaver().interleave(&dec.extrinsic);
                priors[..coded].copy_from_slice(&fed_back);
            }
        }
        Ok(TurboOutput { info_bits, iteration_ber, first_pass_coded_bits: first_pass })
    }
}

/// Runs `n_iter` detector/decoder iterations without a BER reference.
pub fn turbo_equalize(
    i_samples: &[f64],
    q_samples: &[f64],
    trellis: &TrellisSpec,
    codec: &FecCodec,
    noise_var: f64,
    n_iter: usize,
) -> Result<TurboOutput> {
    TurboEqualizer::new(trellis, codec).run(i_samples, q_samples, noise_var, n_iter)
}

/// Packs channel-order coded bits into per-dimension level indices,
/// zero padding the final symbol.
pub fn coded_bits_to_levels(coded: &[u8], bits_per_symbol: usize) -> (Vec<usize>, Vec<usize>) {
    let per_sym = 2 * bits_per_symbol;
    let n_sym = coded.len().div_ceil(per_sym);
    let bit = |i: usize| if i < coded.len() { coded[i] as usize } else { 0 };
    let level = |start: usize| {
        // Gray label -> index
        let mut g = 0usize;
        for b in 0..bits_per_symbol {
            g = (g << 1) | bit(start + b);
        }
        let mut idx = g;
        let mut shift = g >> 1;
        while shift != 0 {
            idx ^= shift;
            shift >>= 1;
        }
        idx
    };
    (0..n_sym).map(|k| (level(k * per_sym), level(k * per_sym + bits_per_symbol))).unzip()
}

#[cfg(test)]
mod tests {
    use super::super::detector::gray_bit;
    use super::super::fec::fec_encode;
    use super::super::trellis::build_trellis;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const PAM4: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

    fn setup(k: usize, seed: u64, sigma: f64, h: &[f64]) -> (Vec<u8>, Vec<f64>, Vec<f64>, FecCodec, TrellisSpec) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let codec = FecCodec::rate_three_quarters(k, 77).unwrap();
        let coded = fec_encode(&info, &codec).unwrap();
        let (iv, qv) = coded_bits_to_levels(&coded, 2);
        let noise = Normal::new(0.0, sigma).unwrap();
        let conv = |idx: &[usize], rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..idx.len())
                .map(|n| {
                    let mut y = 0.0;
                    for (m, &hm) in h.iter().enumerate() {
                        if n >= m {
                            y += hm * PAM4[idx[n - m]];
                        } else {
                            y += hm * PAM4[0];
                        }
                    }
                    y + noise.sample(rng)
                })
                .collect()
        };
        let i = conv(&iv, &mut rng);
        let q = conv(&qv, &mut rng);
        let trellis = build_trellis(&PAM4, h).unwrap();
        (info, i, q, codec, trellis)
    }

    #[test]
    fn level_packing_uses_gray_labels() {
        let bits = [1u8, 1, 0, 1, 1, 0];
        let (i, q) = coded_bits_to_levels(&bits, 2);
        assert_eq!(i, vec![2, 3]);
        assert_eq!(q, vec![1, 0]);
        for (idx, lab) in [(2usize, [1u8, 1]), (1, [0, 1]), (3, [1, 0])] {
            assert_eq!([gray_bit(idx, 0, 2), gray_bit(idx, 1, 2)], lab);
        }
    }

    #[test]
    fn noiseless_block_decodes() {
        let (info, i, q, codec, trellis) = setup(3000, 1, 1e-3, &[1.0, 1.0]);
        let out = TurboEqualizer::new(&trellis, &codec).with_reference(&info).run(&i, &q, 0.01, 2).unwrap();
        assert_eq!(out.info_bits, info);
        assert_eq!(out.iteration_ber, vec![0.0, 0.0]);
    }

    #[test]
    fn single_iteration_equals_detector_then_decoder() {
        let (_info, i, q, codec, trellis) = setup(1500, 2, 0.9, &[1.0, 1.0, 0.3]);
        let nv = 0.81;
        let out = turbo_equalize(&i, &q, &trellis, &codec, nv, 1).unwrap();
        // manual one-shot
        let n = i.len();
        let ie = bcjr_detect_with(&i, &trellis, &vec![0.0; 2 * n], nv, MapAlgorithm::LogMap).unwrap();
        let qe = bcjr_detect_with(&q, &trellis, &vec![0.0; 2 * n], nv, MapAlgorithm::LogMap).unwrap();
        let mut ch = vec![];
        for k in 0..n {
            ch.extend_from_slice(&ie[2 * k..2 * k + 2]);
            ch.extend_from_slice(&qe[2 * k..2 * k + 2]);
        }
        ch.truncate(codec.coded_len());
        let dec = codec.decode_codeword(&codec.interleaver().deinterleave(&ch), None).unwrap();
        assert_eq!(out.info_bits, dec.info_bits);
    }

    #[test]
    fn iteration_prefix_is_deterministic() {
        let (info, i, q, codec, trellis) = setup(1500, 3, 1.0, &[1.0, 1.0, 0.4]);
        let eq = TurboEqualizer::new(&trellis, &codec).with_reference(&info);
        let short = eq.run(&i, &q, 1.0, 2).unwrap();
        let long = eq.run(&i, &q, 1.0, 5).unwrap();
        assert_eq!(&long.iteration_ber[..2], &short.iteration_ber[..]);
        assert_eq!(long.first_pass_coded_bits, short.first_pass_coded_bits);
    }

    #[test]
    fn iterations_help_at_moderate_noise() {
        let (info, i, q, codec, trellis) = setup(6000, 4, 0.8, &[1.0, 1.0, 0.4]);
        let out = TurboEqualizer::new(&trellis, &codec).with_reference(&info).run(&i, &q, 0.64, 6).unwrap();
        let first = out.iteration_ber[0];
        let last = *out.iteration_ber.last().unwrap();
        assert!(first > 0.0, "choose noise so the first pass has errors");
        assert!(last < first, "{:?}", out.iteration_ber);
    }

    #[test]
    fn wrong_sizes_rejected() {
        let (_info, i, q, codec, trellis) = setup(300, 5, 0.5, &[1.0, 1.0]);
        assert!(turbo_equalize(&i[1..], &q, &trellis, &codec, 0.25, 1).is_err());
        assert!(turbo_equalize(&i, &q, &trellis, &codec, 0.25, 0).is_err());
    }
}
