use super::fft::{fft_forward, fft_inverse};
use super::{ComplexFrame, C64};
use crate::error::{Error, Result};

/// Real FIR filter with a group-delay reference.
///
/// `reference_delay` is the tap index treated as time zero; filtering with it
/// keeps input sample `k` at output index `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub reference_delay: usize,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>, reference_delay: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("filter needs at least one tap"));
        }
        if reference_delay >= taps.len() {
            return Err(Error::param(format!(
                "reference delay {reference_delay} outside filter of length {}",
                taps.len()
            )));
        }
        Ok(Self { taps, reference_delay })
    }

    /// Causal filter: time zero at the first tap.
    pub fn causal(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps, 0)
    }

    /// Time zero at the middle tap.
    pub fn centered(taps: Vec<f64>) -> Result<Self> {
        let d = taps.len().saturating_sub(1) / 2;
        Self::new(taps, d)
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    /// Linear convolution of two filters; reference delays add.
    pub fn convolve(&self, other: &FirFilter) -> FirFilter {
        let mut taps = vec![0.0; self.taps.len() + other.taps.len() - 1];
        for (i, a) in self.taps.iter().enumerate() {
            for (j, b) in other.taps.iter().enumerate() {
                taps[i + j] += a * b;
            }
        }
        FirFilter { taps, reference_delay: self.reference_delay + other.reference_delay }
    }
}

// Above this many multiply-accumulates the FFT path is used.
const DIRECT_LIMIT: usize = 1 << 21;

/// Filters a frame; output has the input's length and rate.
pub fn fir_filter(frame: &ComplexFrame, filter: &FirFilter) -> ComplexFrame {
    let n = frame.samples.len();
    let l = filter.taps.len();
    let d = filter.reference_delay;
    if n == 0 {
        return frame.clone();
    }
    let out = if n * l <= DIRECT_LIMIT || l <= 8 {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, y) in out.iter_mut().enumerate() {
            // out[k] = sum_m taps[m] x[k + d - m]
            let mut acc = C64::new(0.0, 0.0);
            for (m, &t) in filter.taps.iter().enumerate() {
                let idx = k as isize + d as isize - m as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += frame.samples[idx as usize] * t;
                }
            }
            *y = acc;
        }
        out
    } else {
        let size = (n + l - 1).next_power_of_two();
        let mut a = vec![C64::new(0.0, 0.0); size];
        a[..n].copy_from_slice(&frame.samples);
        let mut b = vec![C64::new(0.0, 0.0); size];
        for (dst, &t) in b.iter_mut().zip(&filter.taps) {
            *dst = C64::new(t, 0.0);
        }
        fft_forward(&mut a);
        fft_forward(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        fft_inverse(&mut a);
        a[d..d + n].to_vec()
    };
    frame.with_samples(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(v: &[f64]) -> ComplexFrame {
        ComplexFrame::new(v.iter().map(|&x| C64::new(x, 0.0)).collect(), 1.0).unwrap()
    }

    #[test]
    fn unit_tap_is_identity() {
        let f = ComplexFrame::new(
            (0..50).map(|k| C64::new(k as f64, -(k as f64) * 0.5)).collect(),
            10.0,
        )
        .unwrap();
        let out = fir_filter(&f, &FirFilter::causal(vec![1.0]).unwrap());
        assert_eq!(out, f);
    }

    #[test]
    fn impulse_response_equals_taps() {
        let taps = vec![0.5, -1.0, 2.0, 0.25];
        let mut x = vec![0.0; 10];
        x[0] = 1.0;
        let out = fir_filter(&frame(&x), &FirFilter::causal(taps.clone()).unwrap());
        for (i, t) in taps.iter().enumerate() {
            assert!((out.samples[i].re - t).abs() < 1e-15);
        }
        assert!(out.samples[taps.len()..].iter().all(|v| v.norm() < 1e-15));
    }

    #[test]
    fn hand_convolution() {
        let out = fir_filter(&frame(&[1.0, 2.0, 3.0]), &FirFilter::causal(vec![1.0, 1.0]).unwrap());
        let re: Vec<f64> = out.samples.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn fft_path_matches_direct_path() {
        let n = 40_000;
        let x: Vec<C64> = (0..n).map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos())).collect();
        let taps: Vec<f64> = (0..65).map(|k| ((k as f64) - 32.0).cos() / (1.0 + k as f64)).collect();
        let filt = FirFilter::centered(taps).unwrap();
        let f = ComplexFrame::new(x, 1.0).unwrap();
        let fast = fir_filter(&f, &filt);
        // direct evaluation at a few indices
        for &k in &[0usize, 1, 31, 500, n - 1] {
            let mut acc = C64::new(0.0, 0.0);
            for (m, &t) in filt.taps.iter().enumerate() {
                let idx = k as isize + 32 - m as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += f.samples[idx as usize] * t;
                }
            }
            assert!((acc - fast.samples[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_reference_delay() {
        assert!(FirFilter::new(vec![1.0, 2.0], 2).is_err());
        assert!(FirFilter::new(vec![], 0).is_err());
    }

    #[test]
    fn filter_convolution_adds_lengths() {
        let a = FirFilter::causal(vec![1.0, 1.0]).unwrap();
        let b = FirFilter::causal(vec![1.0, 0.5]).unwrap();
        assert_eq!(a.convolve(&b).taps, vec![1.0, 1.5, 0.5]);
    }
}
