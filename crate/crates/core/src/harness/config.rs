use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ChannelConfig;
use crate::error::{Error, Result};
use crate::ptprdfe::{EqualizerConfig, PrTarget};
use crate::txchain::FrameLayout;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Format {
    #[serde(rename = "FTN16QAM")]
    Ftn16Qam,
    #[serde(rename = "PCS64QAM_MB")]
    Pcs64QamMb,
    #[serde(rename = "PCS64QAM_IVMB")]
    Pcs64QamIvmb,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Ftn16Qam => "FTN16QAM",
            Format::Pcs64QamMb => "PCS64QAM_MB",
            Format::Pcs64QamIvmb => "PCS64QAM_IVMB",
        }
    }

    pub fn is_pcs(self) -> bool {
        !matches!(self, Format::Ftn16Qam)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "FTN16QAM" => Ok(Format::Ftn16Qam),
            "PCS64QAM_MB" => Ok(Format::Pcs64QamMb),
            "PCS64QAM_IVMB" => Ok(Format::Pcs64QamIvmb),
            other => Err(Error::config(format!("unknown format {other}"))),
        }
    }
}

/// Receiver back end: `hard`, `fec_oneshot` or `turbo(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ReceiverMode {
    /// Equalizer hard decisions, then hard-input FEC decoding.
    Hard,
    /// Soft detection (BCJR or shaped demapper) and one decoding pass.
    FecOneShot,
    /// `n` detector/decoder iterations (FTN only).
    Turbo(usize),
}

impl ReceiverMode {
    pub fn iterations(self) -> usize {
        match self {
            ReceiverMode::Turbo(n) => n,
            _ => 1,
        }
    }
}

impl fmt::Display for ReceiverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReceiverMode::Hard => f.write_str("hard"),
            ReceiverMode::FecOneShot => f.write_str("fec_oneshot"),
            ReceiverMode::Turbo(n) => write!(f, "turbo({n})"),
        }
    }
}

impl FromStr for ReceiverMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "hard" => return Ok(ReceiverMode::Hard),
            "fec_oneshot" => return Ok(ReceiverMode::FecOneShot),
            _ => {}
        }
        let n = s
            .strip_prefix("turbo(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|n| n.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::config(format!("unknown receiver mode {s}")))?;
        if n == 0 {
            return Err(Error::config("turbo needs at least one iteration"));
        }
        Ok(ReceiverMode::Turbo(n))
    }
}

impl TryFrom<String> for ReceiverMode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ReceiverMode> for String {
    fn from(m: ReceiverMode) -> Self {
        m.to_string()
    }
}

/// Complete parameterization of one link; JSON keys match the field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub format: Format,
    pub baud: f64,
    pub alpha: f64,
    pub entropy_2d: f64,
    #[serde(default = "defaults::rolloff")]
    pub rolloff: f64,
    /// Transmitter samples per symbol before the AWG resampler.
    #[serde(default = "defaults::sps")]
    pub sps: usize,
    #[serde(default = "defaults::awg_rate")]
    pub awg_rate_hz: f64,
    #[serde(default = "defaults::adc_rate")]
    pub adc_rate_hz: f64,
    /// Target info bits per frame; PCS rounds up to whole CCDM blocks.
    #[serde(default = "defaults::info_bits")]
    pub info_bits: usize,
    /// Zero symbols on each side of the frame.
    #[serde(default = "defaults::guard_symbols")]
    pub guard_symbols: usize,
    #[serde(default)]
    pub layout: FrameLayout,
    #[serde(default)]
    pub channel: ChannelConfig,
    pub receiver: ReceiverMode,
    #[serde(default)]
    pub equalizer: EqualizerConfig,
    /// Partial-response target; defaults to `[1, 1]` for FTN and `[1]` for PCS.
    #[serde(default)]
    pub pr_target: Option<PrTarget>,
    #[serde(default = "defaults::puncture_period")]
    pub puncture_period: usize,
    /// Seed of the FEC interleaver and PAS bit placement, shared by Tx and Rx.
    #[serde(default = "defaults::code_seed")]
    pub code_seed: u64,
    #[serde(default = "defaults::foe_window")]
    pub foe_window_hz: f64,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

mod defaults {
    pub fn rolloff() -> f64 {
        0.1
    }
    pub fn sps() -> usize {
        4
    }
    pub fn awg_rate() -> f64 {
        64e9
    }
    pub fn adc_rate() -> f64 {
        80e9
    }
    pub fn info_bits() -> usize {
        1 << 17
    }
    pub fn guard_symbols() -> usize {
        256
    }
    pub fn puncture_period() -> usize {
        3
    }
    pub fn code_seed() -> u64 {
        0x00c0_ffee
    }
    pub fn foe_window() -> f64 {
        2e9
    }
}

impl LinkConfig {
    fn base(format: Format, baud: f64, alpha: f64, entropy_2d: f64, receiver: ReceiverMode, snr_db: f64) -> Self {
        Self {
            format,
            baud,
            alpha,
            entropy_2d,
            rolloff: defaults::rolloff(),
            sps: defaults::sps(),
            awg_rate_hz: defaults::awg_rate(),
            adc_rate_hz: defaults::adc_rate(),
            info_bits: defaults::info_bits(),
            guard_symbols: defaults::guard_symbols(),
            layout: FrameLayout::default(),
            channel: ChannelConfig { snr_db_at_zero_margin: snr_db, ..ChannelConfig::default() },
            receiver,
            equalizer: EqualizerConfig::default(),
            pr_target: None,
            puncture_period: defaults::puncture_period(),
            code_seed: defaults::code_seed(),
            foe_window_hz: defaults::foe_window(),
            seeds: (0..20).collect(),
        }
    }

    /// 45 Gbaud FTN-16QAM, alpha 0.8, turbo(4).
    pub fn ftn16qam() -> Self {
        Self::base(Format::Ftn16Qam, 45e9, 0.8, 4.0, ReceiverMode::Turbo(4), 13.5)
    }

    /// 36 Gbaud PCS-64QAM, Maxwell-Boltzmann, 2D entropy 5.
    pub fn pcs64qam_mb() -> Self {
        Self::base(Format::Pcs64QamMb, 36e9, 1.0, 5.0, ReceiverMode::FecOneShot, 17.0)
    }

    /// 36 Gbaud PCS-64QAM, inverse Maxwell-Boltzmann, 2D entropy 5.
    pub fn pcs64qam_ivmb() -> Self {
        Self::base(Format::Pcs64QamIvmb, 36e9, 1.0, 5.0, ReceiverMode::FecOneShot, 17.0)
    }

    pub fn preset(format: Format) -> Self {
        match format {
            Format::Ftn16Qam => Self::ftn16qam(),
            Format::Pcs64QamMb => Self::pcs64qam_mb(),
            Format::Pcs64QamIvmb => Self::pcs64qam_ivmb(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.format {
            Format::Ftn16Qam => {
                if !(self.alpha > 0.0 && self.alpha < 1.0) {
                    return Err(Error::config("FTN needs 0 < alpha < 1"));
                }
                if self.entropy_2d != 4.0 {
                    return Err(Error::config("FTN-16QAM carries uniform 16QAM (entropy_2d = 4)"));
                }
            }
            _ => {
                if self.alpha != 1.0 {
                    return Err(Error::config("PCS formats use Nyquist shaping (alpha = 1)"));
                }
                if matches!(self.receiver, ReceiverMode::Turbo(_)) {
                    return Err(Error::config("turbo equalization applies to FTN only"));
                }
                if self.target().len() != 1 {
                    return Err(Error::config("PCS formats use the identity partial-response target"));
                }
            }
        }
        if !(self.baud > 0.0) || self.sps < 2 || self.info_bits == 0 {
            return Err(Error::config("baud, sps and info_bits must be positive (sps >= 2)"));
        }
        Ok(())
    }

    pub fn target(&self) -> PrTarget {
        match (&self.pr_target, self.format) {
            (Some(t), _) => t.clone(),
            (None, Format::Ftn16Qam) => PrTarget::duobinary(),
            (None, _) => PrTarget::identity(),
        }
    }

    /// Two-sided bandwidth `alpha·baud`, before roll-off.
    pub fn compressed_bandwidth(&self) -> f64 {
        self.alpha * self.baud
    }

    /// Short hex digest of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config always serializes");
        let hash = Sha256::digest(&json);
        hex::encode(&hash[..8])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_pair_bandwidths() {
        for f in [Format::Ftn16Qam, Format::Pcs64QamMb, Format::Pcs64QamIvmb] {
            LinkConfig::preset(f).validate().unwrap();
        }
        assert!((LinkConfig::ftn16qam().compressed_bandwidth() - LinkConfig::pcs64qam_mb().compressed_bandwidth()).abs() < 1.0);
    }

    #[test]
    fn json_roundtrip_and_digest() {
        let c = LinkConfig::ftn16qam();
        let back = LinkConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.digest(), c.digest());
        let mut d = c.clone();
        d.channel.snr_db_at_zero_margin += 1.0;
        assert_ne!(d.digest(), c.digest());
    }

    #[test]
    fn receiver_mode_strings() {
        for m in [ReceiverMode::Hard, ReceiverMode::FecOneShot, ReceiverMode::Turbo(6)] {
            assert_eq!(m.to_string().parse::<ReceiverMode>().unwrap(), m);
        }
        assert!("turbo(0)".parse::<ReceiverMode>().is_err());
        assert!("soft".parse::<ReceiverMode>().is_err());
    }

    #[test]
    fn invariants_enforced() {
        let mut c = LinkConfig::ftn16qam();
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let mut p = LinkConfig::pcs64qam_mb();
        p.receiver = ReceiverMode::Turbo(2);
        assert!(p.validate().is_err());
        let minimal = r#"{"format":"PCS64QAM_MB","baud":36e9,"alpha":1.0,"entropy_2d":5.0,"receiver":"hard"}"#;
        assert!(LinkConfig::from_json(minimal).is_ok());
        assert!(LinkConfig::from_json(r#"{"format":"QPSK"}"#).is_err());
    }
}
