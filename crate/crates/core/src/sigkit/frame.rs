use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// A uniformly sampled complex baseband waveform.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFrame {
    pub samples: Vec<C64>,
    /// Sample rate in Hz.
    pub sample_rate: f64,
}

impl ComplexFrame {
    pub fn new(samples: Vec<C64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::param(format!("sample rate must be positive, got {sample_rate}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sum of |x|^2.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Mean of |x|^2 per sample.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    /// Returns a frame with the same rate and new samples.
    pub fn with_samples(&self, samples: Vec<C64>) -> Self {
        Self { samples, sample_rate: self.sample_rate }
    }

    pub(crate) fn require_non_empty(&self) -> Result<()> {
        if self.samples.is_empty() {
            Err(Error::param("frame has no samples"))
        } else {
            Ok(())
        }
    }
}
