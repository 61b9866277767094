use std::f64::consts::PI;

use super::FrameLayout;
use crate::error::{Error, Result};
use crate::sigkit::{occupied_bandwidth, ComplexFrame, C64};

/// Adds the frequency-offset pilot tone described by `layout`.
///
/// The tone power is `ratio_db` relative to the frame's power before
/// insertion. A layout without a pilot returns the frame unchanged.
pub fn insert_pilot_tone(frame: &ComplexFrame, layout: &FrameLayout) -> Result<ComplexFrame> {
    let Some(ratio_db) = layout.pilot_tone_power_ratio else {
        return Ok(frame.clone());
    };
    let f = layout.pilot_tone_freq;
    let fs = frame.sample_rate;
    if f.abs() >= fs / 2.0 {
        return Err(Error::config(format!("pilot at {f} Hz outside the first Nyquist zone of {fs} Hz")));
    }
    let half_bw = occupied_bandwidth(frame, 0.99)? / 2.0;
    if f.abs() <= half_bw {
        return Err(Error::config(format!(
            "pilot at {f} Hz lies inside the 99% signal band of +/-{half_bw} Hz"
        )));
    }
    let amp = (frame.power() * 10f64.powf(ratio_db / 10.0)).sqrt();
    let w = 2.0 * PI * f / fs;
    let samples = frame
        .samples
        .iter()
        .enumerate()
        .map(|(k, &x)| x + C64::from_polar(amp, w * k as f64))
        .collect();
    Ok(frame.with_samples(samples))
}
