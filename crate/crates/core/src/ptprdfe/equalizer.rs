use serde::{Deserialize, Serialize};

use super::target::PrTarget;
use crate::error::{Error, Result};
use crate::sigkit::C64;
use crate::txchain::Constellation;

/// Tap counts and step sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EqualizerConfig {
    /// Feedforward taps at 2 samples per symbol; must be odd.
    pub n_ff: usize,
    /// Adaptive residual feedback taps on top of the fixed target.
    pub n_fb: usize,
    pub mu_ff_train: f64,
    pub mu_ff_track: f64,
    pub mu_fb: f64,
    pub mu_phase: f64,
    /// Passes over the preamble during training.
    pub training_passes: usize,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        Self {
            n_ff: 31,
            n_fb: 4,
            mu_ff_train: 1e-3,
            mu_ff_track: 1e-5,
            mu_fb: 1e-4,
            mu_phase: 2e-2,
            training_passes: 24,
        }
    }
}

impl EqualizerConfig {
    fn validate(&self) -> Result<()> {
        if self.n_ff.is_multiple_of(2) {
            return Err(Error::param("feedforward length must be odd"));
        }
        let mus = [self.mu_ff_train, self.mu_ff_track, self.mu_fb, self.mu_phase];
        if mus.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::param("step sizes must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Adaptive state carried from training into tracking.
#[derive(Clone, Debug, PartialEq)]
pub struct EqualizerState {
    pub config: EqualizerConfig,
    pub ff_taps: Vec<C64>,
    pub fb_taps: Vec<C64>,
    /// Unwrapped carrier phase estimate in radians.
    pub phase: f64,
    trained: bool,
}

/// Training diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingReport {
    /// Mean |e|² over the last 20% of the preamble in the final pass.
    pub final_mse: f64,
    /// Smallest final-window mean |e|² over the training passes.
    pub min_mse: f64,
    /// Mean |e|² of each pass.
    pub pass_mse: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EqualizerOutput {
    /// Phase-corrected partial-response samples for the sequence detector.
    pub pr_symbols: Vec<C64>,
    /// Reconstructed partial-response references `ŝ_k + Σ h[m]·ŝ_{k-m}`.
    pub pr_reference: Vec<C64>,
    /// Hard decisions on the original constellation (point indices).
    pub decisions: Vec<usize>,
    pub phase_trace: Vec<f64>,
}

impl EqualizerOutput {
    /// Mean squared distance between output and reference, ignoring the
    /// first `skip` symbols.
    pub fn residual_variance(&self, skip: usize) -> f64 {
        let n = self.pr_symbols.len().saturating_sub(skip);
        if n == 0 {
            return 0.0;
        }
        self.pr_symbols[skip..]
            .iter()
            .zip(&self.pr_reference[skip..])
            .map(|(y, d)| (y - d).norm_sqr())
            .sum::<f64>()
            / n as f64
    }
}

impl EqualizerState {
    /// Center-spike feedforward, zero residual feedback, zero phase.
    pub fn new(config: EqualizerConfig) -> Result<Self> {
        config.validate()?;
        let mut ff_taps = vec![C64::new(0.0, 0.0); config.n_ff];
        ff_taps[config.n_ff / 2] = C64::new(1.0, 0.0);
        Ok(Self { fb_taps: vec![C64::new(0.0, 0.0); config.n_fb], ff_taps, phase: 0.0, trained: false, config })
    }

    /// Unrotated feedforward output for symbol `k`; sample `2k` is the
    /// nominal sampling instant of symbol `k`.
    fn feedforward(&self, rx: &[C64], k: usize) -> C64 {
        let c = self.ff_taps.len() / 2;
        let center = 2 * k + c;
        let mut acc = C64::new(0.0, 0.0);
        for (n, &w) in self.ff_taps.iter().enumerate() {
            if let Some(idx) = center.checked_sub(n) {
                if let Some(&x) = rx.get(idx) {
                    acc += w * x;
                }
            }
        }
        acc
    }

    fn residual_feedback(&self, past: &[C64]) -> C64 {
        let mut v = C64::new(0.0, 0.0);
        for (j, &f) in self.fb_taps.iter().enumerate() {
            if j < past.len() {
                v += f * past[past.len() - 1 - j];
            }
        }
        v
    }

    fn update_ff(&mut self, rx: &[C64], k: usize, e: C64, mu: f64) {
        if mu == 0.0 {
            return;
        }
        let c = self.ff_taps.len() / 2;
        let center = 2 * k + c;
        let rot = C64::from_polar(mu, self.phase);
        for (n, w) in self.ff_taps.iter_mut().enumerate() {
            if let Some(idx) = center.checked_sub(n) {
                if let Some(&x) = rx.get(idx) {
                    *w += rot * e * x.conj();
                }
            }
        }
    }

    fn update_fb(&mut self, past: &[C64], e: C64, mu: f64) {
        if mu == 0.0 {
            return;
        }
        for (j, f) in self.fb_taps.iter_mut().enumerate() {
            if j < past.len() {
                *f -= e * past[past.len() - 1 - j].conj() * mu;
            }
        }
    }

    /// One equalizer step given the symbol history; returns (z, d, ŝ, index).
    fn step(
        &mut self,
        rx: &[C64],
        k: usize,
        past: &[C64],
        target: &PrTarget,
        decide: &mut dyn FnMut(C64) -> (C64, usize),
        mu_ff: f64,
    ) -> (C64, C64, C64, usize) {
        let y = self.feedforward(rx, k) * C64::from_polar(1.0, -self.phase);
        let z = y - self.residual_feedback(past);
        let v = target.tail_response(past);
        let (s, idx) = decide(z - v);
        let d = s + v;
        let e = d - z;
        if d.norm_sqr() > 0.0 {
            self.phase += self.config.mu_phase * (z * d.conj()).arg();
        }
        self.update_ff(rx, k, e, mu_ff);
        self.update_fb(past, e, self.config.mu_fb);
        (z, d, s, idx)
    }
}

/// Data-aided training over the preamble.
///
/// `rx` starts at the first preamble symbol (2 samples per symbol). The
/// first call also sets the gain and phase of the center tap from a
/// correlation against the target response of the known symbols.
pub fn train(
    mut state: EqualizerState,
    rx: &[C64],
    known_symbols: &[C64],
    target: &PrTarget,
) -> Result<(EqualizerState, TrainingReport)> {
    let n = known_symbols.len();
    if n < 8 || rx.len() < 2 * n {
        return Err(Error::param("training needs the whole preamble at 2 samples per symbol"));
    }
    let reference: Vec<C64> = (0..n).map(|k| known_symbols[k] + target.tail_response(&known_symbols[..k])).collect();
    if !state.trained {
        let corr: C64 = (0..n).map(|k| state.feedforward(rx, k) * reference[k].conj()).sum();
        let energy: f64 = reference.iter().map(|d| d.norm_sqr()).sum();
        if corr.norm() > 0.0 && state.config.mu_ff_train > 0.0 {
            let c = state.ff_taps.len() / 2;
            state.ff_taps[c] /= corr.norm() / energy;
            state.phase = corr.arg();
        }
        state.trained = true;
    }

    let window = (n / 5).max(1);
    let mut pass_mse = Vec::new();
    let mut min_mse = f64::INFINITY;
    let mut last_errors = Vec::new();
    let passes = state.config.training_passes.max(1);
    let mu = state.config.mu_ff_train;
    for _ in 0..passes {
        let mut errors = Vec::with_capacity(n);
        let mut phase_start = Vec::new();
        for k in 0..n {
            let mut known = |_: C64| (known_symbols[k], 0usize);
            let (z, d, _, _) = state.step(rx, k, &known_symbols[..k], target, &mut known, mu);
            errors.push((d - z).norm_sqr());
            if k < 64 {
                phase_start.push(state.phase);
            }
        }
        // restart the next pass from the phase seen near the preamble start
        state.phase = phase_start.iter().sum::<f64>() / phase_start.len() as f64;
        pass_mse.push(errors.iter().sum::<f64>() / n as f64);
        min_mse = min_mse.min(errors[n - window..].iter().sum::<f64>() / window as f64);
        last_errors = errors;
    }
    let final_mse = last_errors[n - window..].iter().sum::<f64>() / window as f64;
    // below -40 dB of the target energy the window-to-window spread says
    // nothing about convergence
    let floor = 1e-4 * reference.iter().map(|d| d.norm_sqr()).sum::<f64>() / n as f64;
    if !final_mse.is_finite() || final_mse > (2.0 * min_mse).max(floor) {
        return Err(Error::TrainingFailed(format!(
            "tail MSE {final_mse:.3e} against minimum {min_mse:.3e}"
        )));
    }
    Ok((state, TrainingReport { final_mse, min_mse, pass_mse }))
}

/// Decision-directed equalization of `n_symbols` symbols.
///
/// Symbol `k` of the output is symbol `first_symbol + k` of `rx`. `history`
/// holds the symbols immediately before `first_symbol` (usually the tail of
/// the known preamble), most recent last.
pub fn equalize(
    state: &mut EqualizerState,
    rx: &[C64],
    first_symbol: usize,
    n_symbols: usize,
    history: &[C64],
    target: &PrTarget,
    constellation: &Constellation,
) -> EqualizerOutput {
    let depth = target.len().max(state.fb_taps.len() + 1);
    let mut past: Vec<C64> = history[history.len().saturating_sub(depth)..].to_vec();
    let mut out = EqualizerOutput {
        pr_symbols: Vec::with_capacity(n_symbols),
        pr_reference: Vec::with_capacity(n_symbols),
        decisions: Vec::with_capacity(n_symbols),
        phase_trace: Vec::with_capacity(n_symbols),
    };
    let mut decide = |x: C64| {
        let i = constellation.nearest(x);
        (constellation.points[i], i)
    };
    let mu = state.config.mu_ff_track;
    for k in 0..n_symbols {
        let (z, d, s, idx) = state.step(rx, first_symbol + k, &past, target, &mut decide, mu);
        out.pr_symbols.push(z);
        out.pr_reference.push(d);
        out.decisions.push(idx);
        out.phase_trace.push(state.phase);
        if past.len() == depth {
            past.remove(0);
        }
        past.push(s);
    }
    out
}
