use std::f64::consts::PI;

use super::fft::fft_forward;
use super::{ComplexFrame, C64};
use crate::error::{Error, Result};

pub const WELCH_SEGMENT_LEN: usize = 4096;
const MIN_OCCUPIED_LEN: usize = 1024;

/// Averaged periodogram, frequency axis ascending from -Fs/2.
#[derive(Clone, Debug)]
pub struct Psd {
    pub freqs: Vec<f64>,
    /// Power per Hz.
    pub density: Vec<f64>,
    pub bin_width: f64,
}

impl Psd {
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }

    pub fn centroid(&self) -> f64 {
        let total: f64 = self.density.iter().sum();
        self.freqs.iter().zip(&self.density).map(|(f, p)| f * p).sum::<f64>() / total
    }

    /// Power inside `[lo, hi]`, treating each bin as a constant density over its width.
    pub fn power_between(&self, lo: f64, hi: f64) -> f64 {
        let half = self.bin_width / 2.0;
        self.freqs
            .iter()
            .zip(&self.density)
            .map(|(&f, &p)| {
                let overlap = (hi.min(f + half) - lo.max(f - half)).max(0.0);
                p * overlap
            })
            .sum()
    }
}

/// Welch PSD: Hann window, 50% overlap, 4096-point segments (shorter frames
/// use the largest power of two that fits).
pub fn welch_psd(frame: &ComplexFrame) -> Result<Psd> {
    frame.require_non_empty()?;
    let n = frame.len();
    let seg = if n >= WELCH_SEGMENT_LEN { WELCH_SEGMENT_LEN } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
    let window: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let wpow: f64 = window.iter().map(|w| w * w).sum();
    let step = (seg / 2).max(1);
    let mut acc = vec![0.0; seg];
    let mut count = 0usize;
    let mut start = 0;
    let mut buf = vec![C64::new(0.0, 0.0); seg];
    while start + seg <= n {
        for ((b, &x), &w) in buf.iter_mut().zip(&frame.samples[start..start + seg]).zip(&window) {
            *b = x * w;
        }
        fft_forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    let fs = frame.sample_rate;
    let norm = 1.0 / (count as f64 * wpow * fs);
    let mut freqs = Vec::with_capacity(seg);
    let mut density = Vec::with_capacity(seg);
    for i in 0..seg {
        // fftshift
        let k = (i + seg - seg / 2) % seg;
        let f = if k >= seg - seg / 2 { k as f64 - seg as f64 } else { k as f64 };
        freqs.push(f * fs / seg as f64);
        density.push(acc[k] * norm);
    }
    Ok(Psd { freqs, density, bin_width: fs / seg as f64 })
}

/// Smallest bandwidth, symmetric about the spectral centroid, holding
/// `power_fraction` of the total power.
pub fn occupied_bandwidth(frame: &ComplexFrame, power_fraction: f64) -> Result<f64> {
    if !(power_fraction > 0.0 && power_fraction < 1.0) {
        return Err(Error::param(format!("power fraction {power_fraction} outside (0, 1)")));
    }
    if frame.len() < MIN_OCCUPIED_LEN {
        return Err(Error::param(format!(
            "occupied bandwidth needs at least {MIN_OCCUPIED_LEN} samples, got {}",
            frame.len()
        )));
    }
    let psd = welch_psd(frame)?;
    let total = psd.total_power();
    if total <= 0.0 {
        return Err(Error::param("frame has no power"));
    }
    let c = psd.centroid();
    let target = power_fraction * total;
    let (mut lo, mut hi) = (0.0, frame.sample_rate);
    for _ in 0..80 {
        let w = 0.5 * (lo + hi);
        if psd.power_between(c - w, c + w) >= target {
            hi = w;
        } else {
            lo = w;
        }
    }
    Ok(2.0 * hi)
}
