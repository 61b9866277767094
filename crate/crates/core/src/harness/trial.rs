use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Format, LinkConfig, ReceiverMode};
use crate::channel::apply_channel;
use crate::error::{Error, Result};
use crate::ptprdfe::{equalize, train, EqualizerOutput, EqualizerState};
use crate::rxfront::{compensate_cd, estimate_fo_pilot, remove_frequency_offset, synchronize};
use crate::shaping::{pas_decode, pas_demap_llrs, pas_encode, solve_ivmb, solve_mb, PasInput, PasLayout};
use crate::sigkit::{resample, ComplexFrame, C64};
use crate::turbo::{
    apply_causal, build_trellis, effective_filter, estimate_post_filter, fec_encode, FecCodec, TurboEqualizer,
    MIN_POST_FILTER_SYMBOLS,
};
use crate::txchain::{build_frame, ftn_shape, insert_pilot_tone, matched_filter, normalize_power, Constellation};

const AMPLITUDES: [f64; 4] = [1.0, 3.0, 5.0, 7.0];
/// LLR magnitude attached to equalizer hard decisions.
const HARD_LLR: f64 = 4.0;
const NOISE_VAR_FLOOR: f64 = 1e-6;

const BITS_STREAM: u64 = 1;
const PREAMBLE_SALT: u64 = 0x7072_6561_6d62_6c65;
const CHANNEL_SALT: u64 = 0x6368_616e_6e65_6c00;

/// Outcome of one trial. Failed trials carry the reason and count as
/// coin-flip decisions (BER 0.5).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub format: Format,
    pub config_digest: String,
    pub power_margin_db: f64,
    pub seed: u64,
    pub pre_fec_ber: f64,
    pub post_fec_ber: f64,
    pub ser: f64,
    pub evm_percent: f64,
    pub per_iteration_ber: Vec<f64>,
    pub bit_count: usize,
    pub error_count: usize,
    pub elapsed_seconds: f64,
    pub failure: Option<String>,
}

impl MetricsRecord {
    /// Equality of everything except wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let strip = |r: &Self| Self { elapsed_seconds: 0.0, ..r.clone() };
        strip(self) == strip(other)
    }
}

enum Modem {
    Ftn { codec: FecCodec },
    Pcs { layout: Box<PasLayout> },
}

/// Transmitted frame and everything the receiver needs to score it.
pub struct TxWaveform {
    /// AWG-rate waveform with pilot, unit power.
    pub frame: ComplexFrame,
    /// AWG-rate waveform before the pilot, unit power.
    pub signal: ComplexFrame,
    pub preamble: Vec<C64>,
    pub payload_labels: Vec<usize>,
    pub info_bits: Vec<u8>,
    pub constellation: Constellation,
    modem: Modem,
}

fn random_bits(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BITS_STREAM);
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

fn label_bits(labels: &[usize], bps: usize) -> Vec<u8> {
    labels.iter().flat_map(|&l| (0..bps).rev().map(move |b| ((l >> b) & 1) as u8)).collect()
}

fn pas_layout_for(config: &LinkConfig) -> Result<PasLayout> {
    let spec = match config.format {
        Format::Pcs64QamMb => solve_mb(&AMPLITUDES, config.entropy_2d)?,
        Format::Pcs64QamIvmb => solve_ivmb(&AMPLITUDES, config.entropy_2d)?,
        Format::Ftn16Qam => return Err(Error::config("FTN has no PAS layout")),
    };
    let probe = PasLayout::new(&spec, 1, config.puncture_period, config.code_seed)?;
    let mut blocks = config.info_bits.div_ceil(probe.info_len().max(1)).max(1);
    loop {
        let layout = PasLayout::new(&spec, blocks, config.puncture_period, config.code_seed)?;
        if layout.info_len() >= config.info_bits || blocks > config.info_bits {
            return Ok(layout);
        }
        blocks += 1;
    }
}

/// Builds the transmitted waveform of one trial.
pub fn transmit_waveform(config: &LinkConfig, seed: u64) -> Result<TxWaveform> {
    config.validate()?;
    let (modem, info_bits, payload_labels, constellation) = match config.format {
        Format::Ftn16Qam => {
            let codec = FecCodec::new(config.info_bits, config.puncture_period, config.code_seed)?;
            let info = random_bits(config.info_bits, seed);
            let mut coded = fec_encode(&info, &codec)?;
            coded.resize(coded.len().div_ceil(4) * 4, 0);
            let labels = coded.chunks(4).map(|c| c.iter().fold(0usize, |a, &b| (a << 1) | b as usize)).collect();
            (Modem::Ftn { codec }, info, labels, Constellation::square_qam(16)?)
        }
        _ => {
            let layout = pas_layout_for(config)?;
            let info = random_bits(layout.info_len(), seed);
            let frame = pas_encode(&info, &layout)?;
            let c = Constellation::shaped_qam(layout.spec())?;
            (Modem::Pcs { layout: Box::new(layout) }, info, frame.labels, c)
        }
    };
    let payload: Vec<C64> = payload_labels.iter().map(|&l| constellation.points[l]).collect();
    let mut layout = config.layout.clone();
    layout.payload_len = payload.len();
    let (symbols, preamble) = build_frame(&payload, &layout, seed ^ PREAMBLE_SALT)?;
    let guard = vec![C64::new(0.0, 0.0); config.guard_symbols];
    let mut all = guard.clone();
    all.extend(symbols);
    all.extend(guard);
    let shaped = ftn_shape(&all, config.alpha, config.rolloff, config.sps, config.baud)?;
    let signal = normalize_power(&resample(&shaped, config.awg_rate_hz)?);
    let frame = normalize_power(&insert_pilot_tone(&signal, &layout)?);
    Ok(TxWaveform { frame, signal, preamble, payload_labels, info_bits, constellation, modem })
}

struct Detection {
    pre_fec_ber: f64,
    ser: f64,
    evm_percent: f64,
    info_errors: usize,
    per_iteration_ber: Vec<f64>,
}

/// A trial carried through the equalizer.
pub struct EqualizedTrial {
    pub tx: TxWaveform,
    pub equalized: EqualizerOutput,
    /// Partial-response reference built from the transmitted symbols.
    pub true_reference: Vec<C64>,
}

/// Runs transmitter, channel and receiver front end up to and including the
/// equalizer.
pub fn equalize_trial(config: &LinkConfig, margin_db: f64, seed: u64) -> Result<EqualizedTrial> {
    let tx = transmit_waveform(config, seed)?;
    let mut channel = config.channel.clone();
    channel.power_margin_db = margin_db;
    channel.seed = seed ^ CHANNEL_SALT;
    channel.symbol_rate_hz = Some(config.baud);

    let rx = resample(&tx.frame, config.adc_rate_hz)?;
    let rx = apply_channel(&rx, &channel)?;
    let rx = resample(&rx, 2.0 * config.baud)?;
    let rx = match config.layout.pilot_tone_power_ratio {
        Some(_) => {
            let offset = estimate_fo_pilot(&rx, &config.layout, config.foe_window_hz)?;
            remove_frequency_offset(&rx, offset)
        }
        None => rx,
    };
    let rx = compensate_cd(&rx, &channel)?;
    let rx = matched_filter(&rx, config.alpha, config.rolloff, config.baud)?;
    let sync = synchronize(&rx, &tx.preamble, 2)?;
    let aligned = &rx.samples[sync.sample_lag..];

    let target = config.target();
    let state = EqualizerState::new(config.equalizer.clone())?;
    let (mut state, _) = train(state, aligned, &tx.preamble, &target)?;
    let n = tx.payload_labels.len();
    let equalized = equalize(&mut state, aligned, tx.preamble.len(), n, &tx.preamble, &target, &tx.constellation);

    let mut sent = tx.preamble.clone();
    sent.extend(tx.payload_labels.iter().map(|&l| tx.constellation.points[l]));
    let p = tx.preamble.len();
    let true_reference = (p..p + n).map(|k| sent[k] + target.tail_response(&sent[..k])).collect();
    Ok(EqualizedTrial { tx, equalized, true_reference })
}

fn simulate(config: &LinkConfig, margin_db: f64, seed: u64) -> Result<Detection> {
    let EqualizedTrial { tx, equalized: eq, true_reference } = equalize_trial(config, margin_db, seed)?;
    let n = tx.payload_labels.len();
    let ref_power = true_reference.iter().map(|d| d.norm_sqr()).sum::<f64>() / n as f64;
    let err_power = eq.pr_symbols.iter().zip(&true_reference).map(|(z, d)| (z - d).norm_sqr()).sum::<f64>() / n as f64;
    let evm_percent = 100.0 * (err_power / ref_power).sqrt();

    let bps = tx.constellation.bits_per_symbol.unwrap_or(4);
    let sent_bits = label_bits(&tx.payload_labels, bps);
    let got_bits = label_bits(&eq.decisions, bps);
    let bit_errors = sent_bits.iter().zip(&got_bits).filter(|(a, b)| a != b).count();
    let sym_errors = tx.payload_labels.iter().zip(&eq.decisions).filter(|(a, b)| a != b).count();

    let mut pre_fec_ber = bit_errors as f64 / sent_bits.len() as f64;
    let (info_errors, per_iteration_ber) = match &tx.modem {
        Modem::Ftn { codec } => {
            let back = ftn_back_end(config, codec, &tx, &eq, &got_bits)?;
            if let Some(first_pass) = back.first_pass_coded_bits {
                let n = codec.coded_len();
                pre_fec_ber = count_errors(&first_pass[..n], &sent_bits[..n]) as f64 / n as f64;
            }
            (back.info_errors, back.per_iteration_ber)
        }
        Modem::Pcs { layout } => pcs_back_end(config, layout, &tx, &eq)?,
    };
    Ok(Detection {
        pre_fec_ber,
        ser: sym_errors as f64 / n as f64,
        evm_percent,
        info_errors,
        per_iteration_ber,
    })
}

struct FtnBackEnd {
    info_errors: usize,
    per_iteration_ber: Vec<f64>,
    /// Sequence-detector hard decisions before any decoder feedback.
    first_pass_coded_bits: Option<Vec<u8>>,
}

fn count_errors(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn ftn_back_end(
    config: &LinkConfig,
    codec: &FecCodec,
    tx: &TxWaveform,
    eq: &EqualizerOutput,
    hard_bits: &[u8],
) -> Result<FtnBackEnd> {
    let coded_len = codec.coded_len();
    if config.receiver == ReceiverMode::Hard {
        let llrs: Vec<f64> = hard_bits[..coded_len].iter().map(|&b| if b == 0 { HARD_LLR } else { -HARD_LLR }).collect();
        let decoded = codec.decode_codeword(&codec.interleaver().deinterleave(&llrs), None)?;
        return Ok(FtnBackEnd {
            info_errors: count_errors(&decoded.info_bits, &tx.info_bits),
            per_iteration_ber: Vec::new(),
            first_pass_coded_bits: None,
        });
    }
    let h_pf = if eq.pr_symbols.len() >= MIN_POST_FILTER_SYMBOLS {
        estimate_post_filter(&eq.pr_symbols, &eq.pr_reference)?.filter
    } else {
        crate::sigkit::FirFilter::causal(vec![1.0])?
    };
    let y = apply_causal(&eq.pr_symbols, &h_pf.taps);
    let d = apply_causal(&eq.pr_reference, &h_pf.taps);
    let h_sd = effective_filter(&config.target(), &h_pf);
    let noise_var = (y.iter().zip(&d).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / y.len() as f64 / 2.0)
        .max(NOISE_VAR_FLOOR);
    let levels = tx.constellation.pam_levels.clone().expect("16QAM is square");
    let trellis = build_trellis(&levels, &h_sd.taps)?;
    let i: Vec<f64> = y.iter().map(|v| v.re).collect();
    let q: Vec<f64> = y.iter().map(|v| v.im).collect();
    let out = TurboEqualizer::new(&trellis, codec)
        .with_reference(&tx.info_bits)
        .run(&i, &q, noise_var, config.receiver.iterations())?;
    Ok(FtnBackEnd {
        info_errors: count_errors(&out.info_bits, &tx.info_bits),
        per_iteration_ber: out.iteration_ber,
        first_pass_coded_bits: Some(out.first_pass_coded_bits),
    })
}

fn pcs_back_end(config: &LinkConfig, layout: &PasLayout, tx: &TxWaveform, eq: &EqualizerOutput) -> Result<(usize, Vec<f64>)> {
    let input = match config.receiver {
        ReceiverMode::Hard => PasInput::Symbols(eq.decisions.clone()),
        _ => {
            let noise_var = eq.residual_variance(0).max(NOISE_VAR_FLOOR);
            PasInput::Llrs(pas_demap_llrs(&eq.pr_symbols, layout, noise_var)?)
        }
    };
    let decoded = pas_decode(&input, layout)?;
    Ok((count_errors(&decoded.info_bits, &tx.info_bits), Vec::new()))
}

/// Runs one trial end to end. Component errors are recorded in the
/// returned record instead of being propagated.
pub fn run_trial(config: &LinkConfig, margin_db: f64, seed: u64) -> MetricsRecord {
    let start = Instant::now();
    let bit_count = match config.format {
        Format::Ftn16Qam => config.info_bits,
        _ => pas_layout_for(config).map(|l| l.info_len()).unwrap_or(config.info_bits),
    };
    let mut record = MetricsRecord {
        format: config.format,
        config_digest: config.digest(),
        power_margin_db: margin_db,
        seed,
        pre_fec_ber: 0.5,
        post_fec_ber: 0.5,
        ser: 1.0,
        evm_percent: f64::NAN,
        per_iteration_ber: Vec::new(),
        bit_count,
        error_count: bit_count / 2,
        elapsed_seconds: 0.0,
        failure: None,
    };
    match simulate(config, margin_db, seed) {
        Ok(d) => {
            record.pre_fec_ber = d.pre_fec_ber;
            record.post_fec_ber = d.info_errors as f64 / bit_count as f64;
            record.ser = d.ser;
            record.evm_percent = d.evm_percent;
            record.per_iteration_ber = d.per_iteration_ber;
            record.error_count = d.info_errors;
        }
        Err(e) => {
            log::warn!("trial {} margin {margin_db} seed {seed} failed: {e}", config.format);
            record.failure = Some(e.to_string());
        }
    }
    record.elapsed_seconds = start.elapsed().as_secs_f64();
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(format: Format) -> LinkConfig {
        let mut c = LinkConfig::preset(format);
        c.info_bits = 12_000;
        c.channel.noise_free = true;
        c
    }

    #[test]
    fn noise_free_pipeline_is_error_free() {
        for f in [Format::Ftn16Qam, Format::Pcs64QamMb, Format::Pcs64QamIvmb] {
            let r = run_trial(&small(f), 0.0, 1);
            assert_eq!(r.failure, None, "{f}");
            assert_eq!(r.error_count, 0, "{f}: {r:?}");
            assert_eq!(r.pre_fec_ber, 0.0, "{f}");
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let mut c = small(Format::Ftn16Qam);
        c.channel.noise_free = false;
        let a = run_trial(&c, 0.0, 5);
        let b = run_trial(&c, 0.0, 5);
        assert!(a.same_outcome(&b));
        let other = run_trial(&c, 0.0, 6);
        assert!(!a.same_outcome(&other));
    }

    #[test]
    fn config_errors_become_failed_records() {
        let mut c = small(Format::Pcs64QamMb);
        c.puncture_period = 1;
        let r = run_trial(&c, 0.0, 0);
        assert!(r.failure.is_some());
        assert!(r.post_fec_ber <= 1.0 && r.error_count <= r.bit_count);
    }
}
