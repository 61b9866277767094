//! Link impairments: chromatic dispersion, laser phase noise, carrier
//! frequency offset and receiver noise set by the power margin.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigkit::{bin_frequency, fft_forward, fft_inverse, ComplexFrame, C64};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const PHASE_NOISE_STREAM: u64 = 0x7068_6173;
const AWGN_STREAM: u64 = 0x6177_676e;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub snr_db_at_zero_margin: f64,
    pub power_margin_db: f64,
    /// Combined transmitter and local-oscillator linewidth.
    pub linewidth_hz: f64,
    pub cfo_hz: f64,
    pub fiber_len_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub center_wavelength_nm: f64,
    pub seed: u64,
    /// Symbol rate the SNR is referred to; `None` refers it to the sample rate.
    pub symbol_rate_hz: Option<f64>,
    /// Disables receiver noise and phase noise.
    pub noise_free: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            snr_db_at_zero_margin: 12.0,
            power_margin_db: 0.0,
            linewidth_hz: 200e3,
            cfo_hz: 500e6,
            fiber_len_km: 40.0,
            dispersion_ps_nm_km: 17.0,
            center_wavelength_nm: 1550.0,
            seed: 0,
            symbol_rate_hz: None,
            noise_free: false,
        }
    }
}

impl ChannelConfig {
    /// Group-velocity dispersion β₂ in s²/m.
    pub fn beta2(&self) -> f64 {
        let d = self.dispersion_ps_nm_km * 1e-6; // s/m²
        let lambda = self.center_wavelength_nm * 1e-9;
        -d * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
    }

    /// Accumulated β₂·L in s².
    pub fn accumulated_dispersion(&self) -> f64 {
        self.beta2() * self.fiber_len_km * 1e3
    }

    /// Symbol-rate-referred SNR in dB; `-inf` in noise-free mode.
    pub fn snr_db(&self) -> f64 {
        if self.noise_free {
            f64::NEG_INFINITY
        } else {
            self.snr_db_at_zero_margin + self.power_margin_db
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.fiber_len_km >= 0.0) {
            return Err(Error::param("fiber length must be non-negative"));
        }
        if !(self.linewidth_hz >= 0.0) {
            return Err(Error::param("linewidth must be non-negative"));
        }
        Ok(())
    }

    fn stream(&self, tag: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(tag);
        rng
    }
}

/// Multiplies the spectrum by `exp(sign·j·(β₂L/2)·ω²)`.
pub(crate) fn dispersion_all_pass(frame: &ComplexFrame, beta2_l: f64, sign: f64) -> ComplexFrame {
    if beta2_l == 0.0 || frame.is_empty() {
        return frame.clone();
    }
    let n = frame.len();
    let mut spec = frame.samples.clone();
    fft_forward(&mut spec);
    for (k, x) in spec.iter_mut().enumerate() {
        let w = 2.0 * PI * bin_frequency(k, n, frame.sample_rate);
        *x *= C64::from_polar(1.0, sign * 0.5 * beta2_l * w * w);
    }
    fft_inverse(&mut spec);
    frame.with_samples(spec)
}

/// Fiber dispersion as the all-pass `H(ω) = exp(-j(β₂/2)ω²L)`.
///
/// The filter is applied circularly over the frame, so frames should carry
/// guard intervals longer than the dispersion memory.
pub fn apply_cd(frame: &ComplexFrame, config: &ChannelConfig) -> Result<ComplexFrame> {
    config.validate()?;
    Ok(dispersion_all_pass(frame, config.accumulated_dispersion(), -1.0))
}

/// Wiener phase noise with increment variance `2π·Δν/Fs`.
pub fn apply_phase_noise(frame: &ComplexFrame, config: &ChannelConfig) -> Result<ComplexFrame> {
    config.validate()?;
    if config.linewidth_hz == 0.0 || config.noise_free {
        return Ok(frame.clone());
    }
    let sigma = (2.0 * PI * config.linewidth_hz / frame.sample_rate).sqrt();
    let step = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = config.stream(PHASE_NOISE_STREAM);
    let mut theta = 0.0;
    let samples = frame
        .samples
        .iter()
        .map(|&x| {
            let y = x * C64::from_polar(1.0, theta);
            theta += step.sample(&mut rng);
            y
        })
        .collect();
    Ok(frame.with_samples(samples))
}

/// Carrier frequency offset `exp(j2π·cfo·k/Fs)`.
pub fn apply_cfo(frame: &ComplexFrame, config: &ChannelConfig) -> Result<ComplexFrame> {
    if config.cfo_hz.abs() >= frame.sample_rate / 2.0 {
        return Err(Error::param(format!(
            "offset {} Hz aliases at {} Sa/s",
            config.cfo_hz, frame.sample_rate
        )));
    }
    if config.cfo_hz == 0.0 {
        return Ok(frame.clone());
    }
    Ok(frame.with_samples(rotate(&frame.samples, config.cfo_hz, frame.sample_rate)))
}

pub(crate) fn rotate(samples: &[C64], freq: f64, sample_rate: f64) -> Vec<C64> {
    let w = 2.0 * PI * freq / sample_rate;
    samples.iter().enumerate().map(|(k, &x)| x * C64::from_polar(1.0, w * k as f64)).collect()
}

/// Circular Gaussian noise at `snr_db_at_zero_margin + power_margin_db`.
///
/// The SNR is `Es/N0` at `symbol_rate_hz` with the signal power measured
/// from the frame, so the per-sample noise variance is
/// `P·(Fs/Rs)/SNR`.
pub fn apply_awgn(frame: &ComplexFrame, config: &ChannelConfig) -> Result<ComplexFrame> {
    let snr_db = config.snr_db();
    if snr_db == f64::NEG_INFINITY || snr_db.is_nan() {
        return Ok(frame.clone());
    }
    frame.require_non_empty()?;
    let oversampling = match config.symbol_rate_hz {
        Some(rs) if rs > 0.0 => frame.sample_rate / rs,
        Some(_) => return Err(Error::param("symbol rate must be positive")),
        None => 1.0,
    };
    let variance = frame.power() * oversampling / 10f64.powf(snr_db / 10.0);
    let nd = Normal::new(0.0, (variance / 2.0).sqrt()).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = config.stream(AWGN_STREAM);
    let samples = frame
        .samples
        .iter()
        .map(|&x| x + C64::new(nd.sample(&mut rng), nd.sample(&mut rng)))
        .collect();
    Ok(frame.with_samples(samples))
}

/// Dispersion, frequency offset, phase noise and noise, in that order.
pub fn apply_channel(frame: &ComplexFrame, config: &ChannelConfig) -> Result<ComplexFrame> {
    let x = apply_cd(frame, config)?;
    let x = apply_cfo(&x, config)?;
    let x = apply_phase_noise(&x, config)?;
    apply_awgn(&x, config)
}
