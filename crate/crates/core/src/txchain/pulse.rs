use crate::error::{Error, Result};
use crate::sigkit::{design_rrc, fir_filter, ComplexFrame, C64};

/// Pulse span in symbols used by the transmitter and matched filter.
pub const DEFAULT_SPAN: usize = 128;

/// Upsamples by `sps` and shapes with an RRC compressed by `alpha`.
///
/// `alpha = 1` is Nyquist signaling; `alpha < 1` keeps the symbol clock and
/// narrows the spectrum to `alpha·(1 + rolloff)·baud`, which is
/// faster-than-Nyquist for the narrower pulse.
pub fn ftn_shape(symbols: &[C64], alpha: f64, rolloff: f64, sps: usize, baud: f64) -> Result<ComplexFrame> {
    if alpha < 1.0 && sps < 4 {
        return Err(Error::param("FTN shaping needs at least 4 samples per symbol"));
    }
    let filter = design_rrc(rolloff, DEFAULT_SPAN, sps, alpha)?;
    let mut up = vec![C64::new(0.0, 0.0); symbols.len() * sps];
    for (k, &s) in symbols.iter().enumerate() {
        up[k * sps] = s;
    }
    let frame = ComplexFrame::new(up, baud * sps as f64)?;
    Ok(fir_filter(&frame, &filter))
}

/// Receive filter matched to [`ftn_shape`], at the frame's own rate.
pub fn matched_filter(frame: &ComplexFrame, alpha: f64, rolloff: f64, baud: f64) -> Result<ComplexFrame> {
    let sps_f = frame.sample_rate / baud;
    let sps = sps_f.round() as usize;
    if (sps_f - sps as f64).abs() > 1e-9 {
        return Err(Error::param("matched filter needs an integer number of samples per symbol"));
    }
    let filter = design_rrc(rolloff, DEFAULT_SPAN, sps, alpha)?;
    Ok(fir_filter(frame, &filter))
}

/// Scales the frame to unit mean power.
pub fn normalize_power(frame: &ComplexFrame) -> ComplexFrame {
    let p = frame.power();
    if p == 0.0 {
        return frame.clone();
    }
    let g = 1.0 / p.sqrt();
    frame.with_samples(frame.samples.iter().map(|x| x * g).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigkit::occupied_bandwidth;
    use crate::txchain::{qam_map, Constellation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qam16(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..4 * n).map(|_| rng.random_range(0..2u8)).collect();
        qam_map(&bits, &Constellation::square_qam(16).unwrap()).unwrap()
    }

    fn symbol_rate_samples(symbols: &[C64], alpha: f64) -> (Vec<C64>, f64) {
        let sps = 4;
        let tx = ftn_shape(symbols, alpha, 0.1, sps, 1.0).unwrap();
        let rx = matched_filter(&tx, alpha, 0.1, 1.0).unwrap();
        let y: Vec<C64> = (0..symbols.len()).map(|k| rx.samples[k * sps]).collect();
        // least-squares gain
        let num: C64 = y.iter().zip(symbols).map(|(a, b)| a * b.conj()).sum();
        let den: f64 = symbols.iter().map(|b| b.norm_sqr()).sum();
        let g = num / den;
        let err = y
            .iter()
            .zip(symbols)
            .skip(100)
            .take(symbols.len() - 200)
            .map(|(a, b)| (a / g - b).norm_sqr())
            .sum::<f64>()
            / (symbols.len() - 200) as f64;
        (y, err.sqrt())
    }

    #[test]
    fn nyquist_shaping_is_isi_free() {
        let s = qam16(2000, 1);
        let (_, rms) = symbol_rate_samples(&s, 1.0);
        assert!(rms < 1e-3, "rms {rms}");
    }

    #[test]
    fn ftn_shaping_has_isi() {
        let s = qam16(2000, 2);
        let (_, rms) = symbol_rate_samples(&s, 0.8);
        assert!(rms > 0.05, "rms {rms}");
    }

    #[test]
    fn ftn_bandwidth_matches_slower_nyquist() {
        let s = qam16(20_000, 3);
        let ftn = ftn_shape(&s, 0.8, 0.1, 4, 45e9).unwrap();
        let nyq = ftn_shape(&s, 1.0, 0.1, 4, 36e9).unwrap();
        let a = occupied_bandwidth(&ftn, 0.99).unwrap();
        let b = occupied_bandwidth(&nyq, 0.99).unwrap();
        assert!((a / b - 1.0).abs() < 0.03, "{a} vs {b}");
        let c = occupied_bandwidth(&ftn_shape(&s, 1.0, 0.1, 4, 45e9).unwrap(), 0.99).unwrap();
        assert!((a / c - 0.8).abs() < 0.03);
    }

    #[test]
    fn small_sps_rejected_for_ftn() {
        assert!(ftn_shape(&qam16(10, 4), 0.8, 0.1, 2, 1.0).is_err());
        assert!(ftn_shape(&qam16(10, 4), 1.0, 0.1, 2, 1.0).is_ok());
    }

    #[test]
    fn normalized_power_is_unit() {
        let tx = ftn_shape(&qam16(500, 5), 0.8, 0.1, 4, 1.0).unwrap();
        assert!((normalize_power(&tx).power() - 1.0).abs() < 1e-12);
    }
}
