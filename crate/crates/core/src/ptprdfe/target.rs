use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigkit::C64;
use crate::txchain::Constellation;

/// Monic partial-response target applied per I/Q dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PrTarget {
    taps: Vec<f64>,
}

impl PrTarget {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() || taps[0] != 1.0 {
            return Err(Error::param("partial-response target must start with tap 1"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("partial-response taps must be finite"));
        }
        Ok(Self { taps })
    }

    /// `[1]`: plain equalization to the transmitted symbols.
    pub fn identity() -> Self {
        Self { taps: vec![1.0] }
    }

    /// `[1, 1]`: the duobinary target.
    pub fn duobinary() -> Self {
        Self { taps: vec![1.0, 1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Σ h[m]·s[k-m]` with `s[k-m]` taken from `past` (most recent last)
    /// for `m >= 1`; the `m = 0` term is left out.
    pub fn tail_response(&self, past: &[C64]) -> C64 {
        let mut v = C64::new(0.0, 0.0);
        for (m, &h) in self.taps.iter().enumerate().skip(1) {
            if m <= past.len() {
                v += past[past.len() - m] * h;
            }
        }
        v
    }
}

impl TryFrom<Vec<f64>> for PrTarget {
    type Error = Error;
    fn try_from(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps)
    }
}

impl From<PrTarget> for Vec<f64> {
    fn from(t: PrTarget) -> Self {
        t.taps
    }
}

/// Per-dimension level marginals of a square constellation.
fn level_marginals(c: &Constellation) -> Result<(Vec<f64>, Vec<f64>)> {
    let levels = c
        .pam_levels
        .clone()
        .ok_or_else(|| Error::param("partial-response expansion needs a square constellation"))?;
    let mut p = vec![0.0; levels.len()];
    for (x, &px) in c.points.iter().zip(&c.probabilities) {
        let i = levels
            .iter()
            .position(|&l| (l - x.re).abs() < 1e-9)
            .ok_or_else(|| Error::param("constellation point off its level grid"))?;
        p[i] += px;
    }
    Ok((levels, p))
}

/// Partial-response constellation seen at the equalizer output.
///
/// Every tuple of per-dimension levels is pushed through the target; equal
/// sums are merged and carry the total probability of their tuples.
pub fn pr_expand(constellation: &Constellation, target: &PrTarget) -> Result<Constellation> {
    if target.len() == 1 {
        return Ok(constellation.clone());
    }
    let (levels, probs) = level_marginals(constellation)?;
    let mut sums: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for &h in target.taps() {
        let mut next: Vec<(f64, f64)> = Vec::with_capacity(sums.len() * levels.len());
        for &(s, ps) in &sums {
            for (l, pl) in levels.iter().zip(&probs) {
                next.push((s + h * l, ps * pl));
            }
        }
        next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (v, p) in next {
            match merged.last_mut() {
                Some(last) if (last.0 - v).abs() < 1e-9 => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        sums = merged;
    }
    let mut points = Vec::with_capacity(sums.len() * sums.len());
    let mut probabilities = Vec::with_capacity(points.capacity());
    for &(i, pi) in &sums {
        for &(q, pq) in &sums {
            points.push(C64::new(i, q));
            probabilities.push(pi * pq);
        }
    }
    let pr_levels = sums.into_iter().map(|(v, _)| v).collect();
    Ok(Constellation { points, probabilities, bits_per_symbol: None, pam_levels: Some(pr_levels) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim_weights(c: &Constellation) -> Vec<f64> {
        level_marginals(c).unwrap().1
    }

    #[test]
    fn identity_target_is_unchanged() {
        let c = Constellation::square_qam(16).unwrap();
        assert_eq!(pr_expand(&c, &PrTarget::identity()).unwrap(), c);
    }

    #[test]
    fn duobinary_16qam_is_49_points() {
        let c = Constellation::square_qam(16).unwrap();
        let pr = pr_expand(&c, &PrTarget::duobinary()).unwrap();
        assert_eq!(pr.len(), 49);
        let unit = c.pam_levels.as_ref().unwrap()[2]; // normalized "+1"
        let levels: Vec<f64> = pr.pam_levels.as_ref().unwrap().iter().map(|l| (l / unit).round()).collect();
        assert_eq!(levels, vec![-6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0]);
        let w = dim_weights(&pr);
        let expect = [1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b / 16.0).abs() < 1e-12);
        }
        // brute-force over PAM4 pairs
        let l = c.pam_levels.as_ref().unwrap();
        for (k, lev) in pr.pam_levels.as_ref().unwrap().iter().enumerate() {
            let count = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).filter(|&(a, b)| (l[a] + l[b] - lev).abs() < 1e-9).count();
            assert!((w[k] - count as f64 / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qpsk_duobinary_is_9_points() {
        let c = Constellation::square_qam(4).unwrap();
        let pr = pr_expand(&c, &PrTarget::duobinary()).unwrap();
        assert_eq!(pr.len(), 9);
        let w = dim_weights(&pr);
        assert!((w[0] - 0.25).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12 && (w[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn weights_are_self_convolution() {
        for order in [16usize, 64] {
            let c = Constellation::square_qam(order).unwrap();
            let pr = pr_expand(&c, &PrTarget::duobinary()).unwrap();
            let side = (order as f64).sqrt() as usize;
            assert_eq!(pr.len(), (2 * side - 1) * (2 * side - 1));
            let p = vec![1.0 / side as f64; side];
            let mut conv = vec![0.0; 2 * side - 1];
            for i in 0..side {
                for j in 0..side {
                    conv[i + j] += p[i] * p[j];
                }
            }
            for (a, b) in dim_weights(&pr).iter().zip(&conv) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn target_validation() {
        assert!(PrTarget::new(vec![]).is_err());
        assert!(PrTarget::new(vec![0.5, 1.0]).is_err());
        assert!(PrTarget::new(vec![1.0, 0.7]).is_ok());
        let t: PrTarget = serde_json::from_str("[1.0, 1.0]").unwrap();
        assert_eq!(t, PrTarget::duobinary());
        assert!(serde_json::from_str::<PrTarget>("[2.0]").is_err());
    }
}
