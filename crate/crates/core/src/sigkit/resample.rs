use super::fft::{fft_forward, fft_inverse};
use super::{ComplexFrame, C64};
use crate::error::{Error, Result};

const MAX_RATIO_TERM: u64 = 64;

/// Expresses `to / from` as a reduced fraction `p/q` with both terms at most 64.
pub fn rational_ratio(from: f64, to: f64) -> Option<(u64, u64)> {
    let ratio = to / from;
    for q in 1..=MAX_RATIO_TERM {
        let p = (ratio * q as f64).round();
        if p >= 1.0 && p <= MAX_RATIO_TERM as f64 && (p / q as f64 - ratio).abs() <= 1e-9 * ratio {
            return Some((p as u64, q));
        }
    }
    None
}

/// Band-limited rate conversion by DFT-domain zero padding or truncation.
///
/// The frame is padded with zeros to a multiple of `q` so the new rate is
/// exact; the output keeps `ceil(n·p/q)` samples.
pub fn resample(frame: &ComplexFrame, target_rate: f64) -> Result<ComplexFrame> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::param(format!("target rate must be positive, got {target_rate}")));
    }
    frame.require_non_empty()?;
    if target_rate == frame.sample_rate {
        return Ok(frame.clone());
    }
    let (p, q) = rational_ratio(frame.sample_rate, target_rate).ok_or_else(|| {
        Error::param(format!(
            "rate ratio {}/{} is not a rational with terms <= {MAX_RATIO_TERM}",
            target_rate, frame.sample_rate
        ))
    })?;
    let (p, q) = (p as usize, q as usize);
    let n = frame.len();
    let n_in = n.div_ceil(q) * q;
    let n_out = n_in / q * p;

    let mut spec = vec![C64::new(0.0, 0.0); n_in];
    spec[..n].copy_from_slice(&frame.samples);
    fft_forward(&mut spec);

    let mut out = vec![C64::new(0.0, 0.0); n_out];
    let keep = n_in.min(n_out);
    // bins strictly below the shared Nyquist frequency
    let half = (keep - 1) / 2;
    out[0] = spec[0];
    for k in 1..=half {
        out[k] = spec[k];
        out[n_out - k] = spec[n_in - k];
    }
    if keep % 2 == 0 {
        let k = keep / 2;
        if n_out > n_in {
            // split the input Nyquist bin between both output bins
            out[k] = spec[k] * 0.5;
            out[n_out - k] = spec[k] * 0.5;
        } else {
            out[k] = if n_in > n_out { spec[k] + spec[n_in - k] } else { spec[k] };
        }
    }
    let scale = n_out as f64 / n_in as f64;
    for x in out.iter_mut() {
        *x *= scale;
    }
    fft_inverse(&mut out);
    out.truncate((n * p).div_ceil(q));
    ComplexFrame::new(out, frame.sample_rate * p as f64 / q as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize, f: f64, fs: f64) -> ComplexFrame {
        ComplexFrame::new(
            (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * f * k as f64 / fs)).collect(),
            fs,
        )
        .unwrap()
    }

    #[test]
    fn ratio_search() {
        assert_eq!(rational_ratio(64e9, 80e9), Some((5, 4)));
        assert_eq!(rational_ratio(180e9, 64e9), Some((16, 45)));
        assert_eq!(rational_ratio(1.0, 1.0), Some((1, 1)));
        assert_eq!(rational_ratio(1.0, std::f64::consts::E), None);
    }

    #[test]
    fn same_rate_is_identity() {
        let f = tone(100, 0.1, 1.0);
        assert_eq!(resample(&f, 1.0).unwrap(), f);
    }

    #[test]
    fn up_then_down_roundtrip() {
        // band-limited random-ish content well inside the band
        let n = 2048;
        let x: Vec<C64> = (0..n)
            .map(|k| {
                let t = k as f64;
                C64::new((0.05 * t).sin() + 0.3 * (0.21 * t).cos(), (0.13 * t).cos())
            })
            .collect();
        let f = ComplexFrame::new(x, 10.0).unwrap();
        let up = resample(&f, 20.0).unwrap();
        assert_eq!(up.len(), 2 * n);
        let back = resample(&up, 10.0).unwrap();
        assert_eq!(back.len(), n);
        let rms: f64 = (200..n - 200)
            .map(|k| (back.samples[k] - f.samples[k]).norm_sqr())
            .sum::<f64>()
            / (n - 400) as f64;
        assert!(rms.sqrt() < 1e-6, "rms {}", rms.sqrt());
    }

    #[test]
    fn tone_keeps_frequency_and_amplitude() {
        let fs = 64e9;
        let f0 = 0.1 * fs;
        let x = tone(8192, f0, fs);
        let y = resample(&x, 80e9).unwrap();
        assert_eq!(y.sample_rate, 80e9);
        // FFT peak oracle
        let mut spec = y.samples.clone();
        let n = spec.len();
        fft_forward(&mut spec);
        let (kmax, _) = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        let df = y.sample_rate / n as f64;
        assert!((kmax as f64 * df - f0).abs() <= df);
        let interior = &y.samples[n / 4..3 * n / 4];
        let amp = (interior.iter().map(|c| c.norm_sqr()).sum::<f64>() / interior.len() as f64).sqrt();
        assert!((amp - 1.0).abs() < 0.01, "amplitude {amp}");
    }

    #[test]
    fn rejects_irrational_ratio() {
        let f = tone(64, 0.1, 1.0);
        assert!(matches!(resample(&f, 1.0 / 67.0), Err(Error::Parameter(_))));
        assert!(resample(&f, -1.0).is_err());
    }
}
