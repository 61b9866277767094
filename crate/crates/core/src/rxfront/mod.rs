//! Receiver front end: pilot-tone frequency offset estimation, dispersion
//! compensation and preamble-anchored synchronization.

use std::f64::consts::PI;

use crate::channel::{dispersion_all_pass, rotate, ChannelConfig};
use crate::error::{Error, Result};
use crate::sigkit::{fft_forward, fft_inverse, ComplexFrame, C64};
use crate::txchain::FrameLayout;

/// Where the preamble sits in a received stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyncResult {
    /// Integer-sample lag of the first preamble symbol.
    pub sample_lag: usize,
    pub symbol_offset: usize,
    /// `sample_lag mod sps`.
    pub timing_phase: usize,
    /// Complex correlation at the peak divided by the preamble energy.
    pub gain: C64,
    /// Peak magnitude over the RMS of the other lags.
    pub peak_to_sidelobe: f64,
}

fn frequency_of_bin(k: f64, n: usize, fs: f64) -> f64 {
    let k = if k > n as f64 / 2.0 { k - n as f64 } else { k };
    k * fs / n as f64
}

/// Offset of the pilot tone from its nominal frequency.
///
/// The frame is Hann windowed and zero padded to a power of two; the
/// periodogram peak inside `pilot ± search_window_hz` is refined by a
/// parabola through the log power of the three bins around it.
pub fn estimate_fo_pilot(frame: &ComplexFrame, layout: &FrameLayout, search_window_hz: f64) -> Result<f64> {
    frame.require_non_empty()?;
    if layout.pilot_tone_power_ratio.is_none() {
        return Err(Error::EstimationFailed("layout has no pilot tone".into()));
    }
    let n = frame.len().next_power_of_two();
    let fs = frame.sample_rate;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let len = frame.len();
    for (i, &x) in frame.samples.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos();
        buf[i] = x * w;
    }
    fft_forward(&mut buf);
    let power: Vec<f64> = buf.iter().map(|x| x.norm_sqr()).collect();

    let lo = layout.pilot_tone_freq - search_window_hz;
    let hi = layout.pilot_tone_freq + search_window_hz;
    let bins: Vec<usize> = (0..n)
        .filter(|&k| {
            let f = frequency_of_bin(k as f64, n, fs);
            f >= lo && f <= hi
        })
        .collect();
    if bins.len() < 3 {
        return Err(Error::EstimationFailed("search window narrower than three bins".into()));
    }
    let peak = *bins
        .iter()
        .max_by(|&&a, &&b| power[a].partial_cmp(&power[b]).unwrap())
        .expect("non-empty window");
    let mut sorted: Vec<f64> = bins.iter().map(|&k| power[k]).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    // At least 6 dB, raised so that the largest of the window's noise bins
    // (exponential, median ln 2 of the mean) rarely passes on its own.
    let threshold = 10f64.powf(0.6).max(2.0 * (bins.len() as f64).ln() / std::f64::consts::LN_2);
    if !(power[peak] >= threshold * median) {
        return Err(Error::EstimationFailed(format!(
            "no pilot peak {:.1} dB above the window median near {} Hz",
            10.0 * threshold.log10(),
            layout.pilot_tone_freq
        )));
    }
    let l = |k: usize| power[k % n].max(f64::MIN_POSITIVE).ln();
    let (a, b, c) = (l(peak + n - 1), l(peak), l(peak + 1));
    let denom = a - 2.0 * b + c;
    let delta = if denom < 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let f_peak = frequency_of_bin(peak as f64 + delta, n, fs);
    Ok(f_peak - layout.pilot_tone_freq)
}

/// Removes a frequency offset estimated by [`estimate_fo_pilot`].
pub fn remove_frequency_offset(frame: &ComplexFrame, offset_hz: f64) -> ComplexFrame {
    frame.with_samples(rotate(&frame.samples, -offset_hz, frame.sample_rate))
}

/// Inverse of the channel's dispersion all-pass, for a known fiber.
pub fn compensate_cd(frame: &ComplexFrame, config: &ChannelConfig) -> Result<ComplexFrame> {
    if !(config.fiber_len_km >= 0.0) {
        return Err(Error::param("fiber length must be non-negative"));
    }
    Ok(dispersion_all_pass(frame, config.accumulated_dispersion(), 1.0))
}

/// Locates the preamble by cross-correlation over every integer lag.
///
/// The preamble is compared symbol-spaced (`sps` samples apart). Fails when
/// the peak is below three times the RMS of the other lags.
pub fn synchronize(frame: &ComplexFrame, preamble_reference: &[C64], sps: usize) -> Result<SyncResult> {
    frame.require_non_empty()?;
    if sps == 0 || preamble_reference.is_empty() {
        return Err(Error::param("synchronization needs a preamble and sps >= 1"));
    }
    let span = (preamble_reference.len() - 1) * sps + 1;
    if frame.len() < span {
        return Err(Error::SyncFailed("frame shorter than the preamble".into()));
    }
    let lags = frame.len() - span + 1;
    let n = (frame.len() + span).next_power_of_two();
    let mut x = vec![C64::new(0.0, 0.0); n];
    x[..frame.len()].copy_from_slice(&frame.samples);
    let mut p = vec![C64::new(0.0, 0.0); n];
    // time-reversed conjugate template
    for (k, s) in preamble_reference.iter().enumerate() {
        p[span - 1 - k * sps] = s.conj();
    }
    fft_forward(&mut x);
    fft_forward(&mut p);
    for (a, b) in x.iter_mut().zip(&p) {
        *a *= b;
    }
    fft_inverse(&mut x);
    let corr: Vec<C64> = (0..lags).map(|lag| x[lag + span - 1]).collect();
    let (peak, peak_val) = corr
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
        .map(|(i, v)| (i, *v))
        .expect("at least one lag");
    let guard = 2 * sps;
    let (mut acc, mut count) = (0.0, 0usize);
    for (i, v) in corr.iter().enumerate() {
        if i.abs_diff(peak) > guard {
            acc += v.norm_sqr();
            count += 1;
        }
    }
    let rms = if count > 0 { (acc / count as f64).sqrt() } else { 0.0 };
    let ratio = if rms > 0.0 { peak_val.norm() / rms } else { f64::INFINITY };
    if !(ratio >= 3.0) || peak_val.norm() == 0.0 {
        return Err(Error::SyncFailed(format!("correlation peak only {ratio:.2}x the sidelobe RMS")));
    }
    let energy: f64 = preamble_reference.iter().map(|s| s.norm_sqr()).sum();
    Ok(SyncResult {
        sample_lag: peak,
        symbol_offset: peak / sps,
        timing_phase: peak % sps,
        gain: peak_val / energy,
        peak_to_sidelobe: ratio,
    })
}
