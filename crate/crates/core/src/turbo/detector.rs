use super::llr::{bit_metric, clamp_llr, MapAlgorithm};
use super::trellis::TrellisSpec;
use crate::error::{Error, Result};

/// Gray label of level index `i`, MSB first over `bits` bits.
#[inline]
pub fn gray_bit(i: usize, bit: usize, bits: usize) -> u8 {
    let g = i ^ (i >> 1);
    ((g >> (bits - 1 - bit)) & 1) as u8
}

/// Forward-backward MAP detection on one real dimension.
///
/// `prior_llrs` holds `bits_per_symbol` Gray-label LLRs per sample. The
/// result is extrinsic: posterior minus prior, clamped.
pub fn bcjr_detect(samples: &[f64], trellis: &TrellisSpec, prior_llrs: &[f64], noise_var: f64) -> Result<Vec<f64>> {
    bcjr_detect_with(samples, trellis, prior_llrs, noise_var, MapAlgorithm::LogMap)
}

pub fn bcjr_detect_with(
    samples: &[f64],
    trellis: &TrellisSpec,
    prior_llrs: &[f64],
    noise_var: f64,
    algorithm: MapAlgorithm,
) -> Result<Vec<f64>> {
    if !(noise_var > 0.0) {
        return Err(Error::param(format!("noise variance must be positive, got {noise_var}")));
    }
    let bps = trellis.bits_per_symbol();
    let n = samples.len();
    if prior_llrs.len() != n * bps {
        return Err(Error::param(format!("expected {} prior LLRs, got {}", n * bps, prior_llrs.len())));
    }
    let m = trellis.num_inputs();
    let ns = trellis.num_states();
    let ninf = f64::NEG_INFINITY;
    let inv2var = 0.5 / noise_var;

    // log prior of every input symbol at step k
    let symbol_prior = |k: usize| -> Vec<f64> {
        (0..m)
            .map(|x| (0..bps).map(|b| bit_metric(gray_bit(x, b, bps), prior_llrs[k * bps + b])).sum())
            .collect()
    };

    let mut alpha = vec![0.0; (n + 1) * ns];
    for k in 0..n {
        let lp = symbol_prior(k);
        let y = samples[k];
        let (cur, rest) = alpha.split_at_mut((k + 1) * ns);
        let cur = &cur[k * ns..];
        let next = &mut rest[..ns];
        next.fill(ninf);
        for s in 0..ns {
            let a = cur[s];
            if a == ninf {
                continue;
            }
            for x in 0..m {
                let d = y - trellis.branch_output(s, x);
                let g = -d * d * inv2var + lp[x];
                let ns_ = trellis.next_state(s, x);
                next[ns_] = algorithm.combine(next[ns_], a + g);
            }
        }
        let mx = next.iter().cloned().fold(ninf, f64::max);
        next.iter_mut().for_each(|v| *v -= mx);
    }

    let mut out = vec![0.0; n * bps];
    let mut beta = vec![0.0; ns];
    let mut prev = vec![ninf; ns];
    for k in (0..n).rev() {
        let lp = symbol_prior(k);
        let y = samples[k];
        let a_k = &alpha[k * ns..(k + 1) * ns];
        let mut acc = vec![[ninf; 2]; bps];
        prev.fill(ninf);
        for s in 0..ns {
            for x in 0..m {
                let d = y - trellis.branch_output(s, x);
                let g = -d * d * inv2var + lp[x];
                let b = beta[trellis.next_state(s, x)];
                prev[s] = algorithm.combine(prev[s], g + b);
                let metric = a_k[s] + g + b;
                for (bit, slot) in acc.iter_mut().enumerate() {
                    let v = gray_bit(x, bit, bps) as usize;
                    slot[v] = algorithm.combine(slot[v], metric);
                }
            }
        }
        for bit in 0..bps {
            let post = acc[bit][0] - acc[bit][1];
            out[k * bps + bit] = clamp_llr(post - prior_llrs[k * bps + bit]);
        }
        let mx = prev.iter().cloned().fold(ninf, f64::max);
        for (b, p) in beta.iter_mut().zip(&prev) {
            *b = p - mx;
        }
    }
    Ok(out)
}
