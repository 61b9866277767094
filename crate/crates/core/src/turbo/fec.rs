//! Punctured recursive systematic convolutional code with a log-MAP decoder.
//!
//! The mother code is the memory-2 RSC with feedback 7 and feedforward 5
//! (octal), terminated to the zero state. Parity is kept on every
//! `puncture_period`-th step, giving rate `p/(p+1)` before the four tail bits.
//!
//! Codeword order (before interleaving) is
//! `[info bits | kept parity bits | u_K, p_K, u_K+1, p_K+1]`.

use super::interleaver::Interleaver;
use super::llr::{bit_metric, clamp_llr, hard_bit, MapAlgorithm};
use crate::error::{Error, Result};

const NUM_STATES: usize = 4;
pub const TAIL_STEPS: usize = 2;
pub const TAIL_BITS: usize = 2 * TAIL_STEPS;

/// One RSC step from `state = (s1 << 1) | s2`; returns (parity, next state).
#[inline]
fn rsc_step(state: usize, u: u8) -> (u8, usize) {
    let s1 = ((state >> 1) & 1) as u8;
    let s2 = (state & 1) as u8;
    let a = u ^ s1 ^ s2;
    let p = a ^ s2;
    (p, ((a as usize) << 1) | s1 as usize)
}

/// Input that drives the feedback register to zero.
#[inline]
fn tail_input(state: usize) -> u8 {
    (((state >> 1) ^ state) & 1) as u8
}

#[derive(Clone, Debug)]
pub struct FecCodec {
    info_len: usize,
    puncture_period: usize,
    interleaver: Interleaver,
    pub algorithm: MapAlgorithm,
}

/// A-posteriori LLRs over every step of the mother code.
#[derive(Clone, Debug)]
pub struct MotherPosterior {
    /// `info_len + 2` systematic posteriors (tail included).
    pub systematic: Vec<f64>,
    /// `info_len + 2` parity posteriors, punctured steps included.
    pub parity: Vec<f64>,
}

/// Result of one soft decoding pass.
#[derive(Clone, Debug)]
pub struct FecDecoded {
    /// Extrinsic LLRs on the transmitted coded bits, codeword order.
    pub extrinsic: Vec<f64>,
    pub info_bits: Vec<u8>,
    pub info_posterior: Vec<f64>,
}

impl FecCodec {
    /// Rate `p/(p+1)` code over `info_len` bits with a seeded coded-bit interleaver.
    pub fn new(info_len: usize, puncture_period: usize, interleaver_seed: u64) -> Result<Self> {
        if info_len == 0 {
            return Err(Error::param("FEC block needs at least one info bit"));
        }
        if puncture_period == 0 {
            return Err(Error::param("puncture period must be at least 1"));
        }
        let coded = info_len + info_len.div_ceil(puncture_period) + TAIL_BITS;
        Ok(Self {
            info_len,
            puncture_period,
            interleaver: Interleaver::new(coded, interleaver_seed),
            algorithm: MapAlgorithm::LogMap,
        })
    }

    /// The default rate-3/4 code.
    pub fn rate_three_quarters(info_len: usize, interleaver_seed: u64) -> Result<Self> {
        Self::new(info_len, 3, interleaver_seed)
    }

    pub fn info_len(&self) -> usize {
        self.info_len
    }

    pub fn puncture_period(&self) -> usize {
        self.puncture_period
    }

    /// Kept parity bits plus the tail.
    pub fn redundancy_len(&self) -> usize {
        self.info_len.div_ceil(self.puncture_period) + TAIL_BITS
    }

    pub fn coded_len(&self) -> usize {
        self.info_len + self.redundancy_len()
    }

    /// Nominal rate without termination.
    pub fn nominal_rate(&self) -> f64 {
        self.puncture_period as f64 / (self.puncture_period + 1) as f64
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    fn parity_kept(&self, step: usize) -> bool {
        step.is_multiple_of(self.puncture_period)
    }

    fn check_info(&self, info: &[u8]) -> Result<()> {
        if info.len() != self.info_len {
            return Err(Error::param(format!(
                "FEC block takes {} info bits, got {}",
                self.info_len,
                info.len()
            )));
        }
        Ok(())
    }

    /// Kept parity bits followed by the four tail bits.
    pub fn encode_redundancy(&self, info: &[u8]) -> Result<Vec<u8>> {
        self.check_info(info)?;
        let mut out = Vec::with_capacity(self.redundancy_len());
        let mut state = 0;
        for (t, &u) in info.iter().enumerate() {
            let (p, next) = rsc_step(state, u & 1);
            if self.parity_kept(t) {
                out.push(p);
            }
            state = next;
        }
        for _ in 0..TAIL_STEPS {
            let u = tail_input(state);
            let (p, next) = rsc_step(state, u);
            out.push(u);
            out.push(p);
            state = next;
        }
        debug_assert_eq!(state, 0);
        Ok(out)
    }

    /// Codeword in natural (non-interleaved) order.
    pub fn encode_codeword(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut cw: Vec<u8> = info.iter().map(|b| b & 1).collect();
        cw.extend(self.encode_redundancy(info)?);
        Ok(cw)
    }

    /// Log-MAP forward-backward over the mother trellis.
    ///
    /// `systematic` and `parity` have `info_len + 2` entries each; punctured
    /// parity steps carry LLR 0. `apriori` covers the info bits only.
    pub fn decode_mother(&self, systematic: &[f64], parity: &[f64], apriori: Option<&[f64]>) -> Result<MotherPosterior> {
        let steps = self.info_len + TAIL_STEPS;
        if systematic.len() != steps || parity.len() != steps {
            return Err(Error::param(format!("mother decoder expects {steps} LLRs per stream")));
        }
        if let Some(a) = apriori {
            if a.len() != self.info_len {
                return Err(Error::param("a-priori length differs from info length"));
            }
        }
        let alg = self.algorithm;
        let ninf = f64::NEG_INFINITY;
        let gamma = |t: usize, s: usize, u: u8| -> (f64, u8, usize) {
            let (p, next) = rsc_step(s, u);
            let la = match apriori {
                Some(a) if t < self.info_len => a[t],
                _ => 0.0,
            };
            let g = bit_metric(u, systematic[t] + la) + bit_metric(p, parity[t]);
            (g, p, next)
        };
        let allowed = |t: usize, s: usize, u: u8| t < self.info_len || u == tail_input(s);

        let mut alpha = vec![[ninf; NUM_STATES]; steps + 1];
        alpha[0][0] = 0.0;
        for t in 0..steps {
            let mut next_a = [ninf; NUM_STATES];
            for s in 0..NUM_STATES {
                if alpha[t][s] == ninf {
                    continue;
                }
                for u in 0..2u8 {
                    if !allowed(t, s, u) {
                        continue;
                    }
                    let (g, _, n) = gamma(t, s, u);
                    next_a[n] = alg.combine(next_a[n], alpha[t][s] + g);
                }
            }
            let m = next_a.iter().cloned().fold(ninf, f64::max);
            for v in next_a.iter_mut() {
                *v -= m;
            }
            alpha[t + 1] = next_a;
        }

        let mut beta = [ninf; NUM_STATES];
        beta[0] = 0.0;
        let mut sys_post = vec![0.0; steps];
        let mut par_post = vec![0.0; steps];
        for t in (0..steps).rev() {
            let mut u_acc = [ninf; 2];
            let mut p_acc = [ninf; 2];
            let mut prev_b = [ninf; NUM_STATES];
            for s in 0..NUM_STATES {
                for u in 0..2u8 {
                    if !allowed(t, s, u) {
                        continue;
                    }
                    let (g, p, n) = gamma(t, s, u);
                    if beta[n] == ninf {
                        continue;
                    }
                    prev_b[s] = alg.combine(prev_b[s], g + beta[n]);
                    if alpha[t][s] == ninf {
                        continue;
                    }
                    let metric = alpha[t][s] + g + beta[n];
                    u_acc[u as usize] = alg.combine(u_acc[u as usize], metric);
                    p_acc[p as usize] = alg.combine(p_acc[p as usize], metric);
                }
            }
            sys_post[t] = clamp_llr(u_acc[0] - u_acc[1]);
            par_post[t] = clamp_llr(p_acc[0] - p_acc[1]);
            let m = prev_b.iter().cloned().fold(ninf, f64::max);
            for v in prev_b.iter_mut() {
                *v -= m;
            }
            beta = prev_b;
        }
        Ok(MotherPosterior { systematic: sys_post, parity: par_post })
    }

    /// Splits codeword-order LLRs into mother-code streams (punctured steps get 0).
    fn depuncture(&self, llrs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.info_len;
        let mut sys = vec![0.0; k + TAIL_STEPS];
        let mut par = vec![0.0; k + TAIL_STEPS];
        sys[..k].copy_from_slice(&llrs[..k]);
        let mut idx = k;
        for (t, slot) in par.iter_mut().enumerate().take(k) {
            if self.parity_kept(t) {
                *slot = llrs[idx];
                idx += 1;
            }
        }
        for j in 0..TAIL_STEPS {
            sys[k + j] = llrs[idx];
            par[k + j] = llrs[idx + 1];
            idx += 2;
        }
        (sys, par)
    }

    fn repuncture(&self, sys: &[f64], par: &[f64]) -> Vec<f64> {
        let k = self.info_len;
        let mut out = Vec::with_capacity(self.coded_len());
        out.extend_from_slice(&sys[..k]);
        for (t, &p) in par.iter().enumerate().take(k) {
            if self.parity_kept(t) {
                out.push(p);
            }
        }
        for j in 0..TAIL_STEPS {
            out.push(sys[k + j]);
            out.push(par[k + j]);
        }
        out
    }

    /// Soft decoding of a codeword-order LLR block.
    pub fn decode_codeword(&self, channel_llrs: &[f64], info_priors: Option<&[f64]>) -> Result<FecDecoded> {
        if channel_llrs.len() != self.coded_len() {
            return Err(Error::param(format!(
                "decoder expects {} coded LLRs, got {}",
                self.coded_len(),
                channel_llrs.len()
            )));
        }
        let (sys, par) = self.depuncture(channel_llrs);
        let post = self.decode_mother(&sys, &par, info_priors)?;
        let k = self.info_len;
        let mut sys_ext = vec![0.0; sys.len()];
        for t in 0..sys.len() {
            let la = match info_priors {
                Some(a) if t < k => a[t],
                _ => 0.0,
            };
            sys_ext[t] = clamp_llr(post.systematic[t] - sys[t] - la);
        }
        let par_ext: Vec<f64> = post.parity.iter().zip(&par).map(|(p, c)| clamp_llr(p - c)).collect();
        Ok(FecDecoded {
            extrinsic: self.repuncture(&sys_ext, &par_ext),
            info_bits: post.systematic[..k].iter().map(|&l| hard_bit(l)).collect(),
            info_posterior: post.systematic[..k].to_vec(),
        })
    }
}

/// RSC encode, terminate, puncture and interleave.
pub fn fec_encode(info_bits: &[u8], codec: &FecCodec) -> Result<Vec<u8>> {
    let cw = codec.encode_codeword(info_bits)?;
    Ok(codec.interleaver().interleave(&cw))
}

/// Log-MAP decoding of deinterleaved channel LLRs.
pub fn fec_bcjr_decode(channel_llrs: &[f64], info_priors: Option<&[f64]>, codec: &FecCodec) -> Result<FecDecoded> {
    codec.decode_codeword(channel_llrs, info_priors)
}
