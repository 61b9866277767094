use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::FirFilter;
use crate::error::{Error, Result};

/// Root-raised-cosine impulse response at `t` symbol periods, unnormalized.
///
/// The removable singularities at `t = 0` and `|t| = 1/(4·rolloff)` use their
/// limiting values.
pub fn rrc_pulse(t: f64, rolloff: f64) -> f64 {
    let t = t.abs();
    let b = rolloff;
    if t < 1e-12 {
        return 1.0 - b + 4.0 * b / PI;
    }
    if b == 0.0 {
        return (PI * t).sin() / (PI * t);
    }
    let x = 4.0 * b * t;
    if (1.0 - x * x).abs() < 1e-10 {
        let a = PI / (4.0 * b);
        return b * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    ((PI * t * (1.0 - b)).sin() + x * (PI * t * (1.0 + b)).cos()) / (PI * t * (1.0 - x * x))
}

/// Designs a unit-energy RRC filter of `span·sps + 1` taps.
///
/// `bandwidth_scale` compresses the spectrum: the pulse is evaluated at
/// `t·bandwidth_scale`, so the two-sided bandwidth becomes
/// `bandwidth_scale·(1 + rolloff)/T` while the symbol clock stays put.
pub fn design_rrc(rolloff: f64, span: usize, sps: usize, bandwidth_scale: f64) -> Result<FirFilter> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::param(format!("rolloff {rolloff} outside [0, 1]")));
    }
    if !(bandwidth_scale > 0.0 && bandwidth_scale <= 1.0) {
        return Err(Error::param(format!("bandwidth scale {bandwidth_scale} outside (0, 1]")));
    }
    if span < 2 || sps < 2 {
        return Err(Error::param("RRC design needs span >= 2 and sps >= 2"));
    }
    if !(span * sps).is_multiple_of(2) {
        return Err(Error::param("span * sps must be even so the filter has a center tap"));
    }
    let len = span * sps + 1;
    let center = len / 2;
    let mut taps = vec![0.0; len];
    for i in 0..=center {
        let t = bandwidth_scale * i as f64 / sps as f64;
        let v = rrc_pulse(t, rolloff);
        taps[center + i] = v;
        taps[center - i] = v;
    }
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    for t in taps.iter_mut() {
        *t /= norm;
    }
    FirFilter::new(taps, center)
}
