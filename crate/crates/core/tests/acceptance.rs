//! End-to-end acceptance checks. Each test prints one PASS/FAIL line and
//! then asserts, so `cargo test --test acceptance -- --nocapture` gives a
//! compact report. A global lock runs the checks one at a time so their
//! wall-clock budgets are measured without contention.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use linksim::channel::{apply_cd, apply_channel, ChannelConfig};
use linksim::harness::{
    equalize_trial, margin_at_ber, run_trial, summarize, sweep, transmit_waveform, Format, LinkConfig,
    MarginEstimate, ReceiverMode, SweepPoint,
};
use linksim::ptprdfe::{pr_expand, PrTarget};
use linksim::rxfront::{compensate_cd, estimate_fo_pilot};
use linksim::shaping::{ccdm_dematch, ccdm_info_bits, ccdm_match, composition_for, solve_ivmb, solve_mb};
use linksim::sigkit::{occupied_bandwidth, resample};
use linksim::turbo::{bcjr_detect, build_trellis, estimate_post_filter, LLR_CLAMP};
use linksim::txchain::Constellation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

static SERIAL: Mutex<()> = Mutex::new(());

const AMPLITUDES: [f64; 4] = [1.0, 3.0, 5.0, 7.0];

fn report(name: &str, started: Instant, budget: Duration, ok: bool, detail: &str) {
    let elapsed = started.elapsed();
    let in_budget = elapsed < budget;
    let verdict = if ok && in_budget { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] {name}: {detail} ({:.1} s of {:.0} s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(ok, "{name}: {detail}");
    assert!(in_budget, "{name}: took {elapsed:?}, budget {budget:?}");
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

#[test]
fn partial_response_constellation() {
    let _g = lock();
    let t = Instant::now();
    let qam = Constellation::square_qam(16).unwrap();
    let pr = pr_expand(&qam, &PrTarget::duobinary()).unwrap();

    // per-dimension marginal of the in-phase component
    let step = 1.0 / 10f64.sqrt();
    let mut marginal: BTreeMap<i64, f64> = BTreeMap::new();
    for (p, w) in pr.points.iter().zip(&pr.probabilities) {
        *marginal.entry((p.re / step).round() as i64).or_default() += w;
    }
    let levels: Vec<i64> = marginal.keys().copied().collect();
    let weights: Vec<f64> = marginal.values().copied().collect();
    let expected = [1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0].map(|w| w / 16.0);
    let ok = pr.points.len() == 49
        && levels == vec![-6, -4, -2, 0, 2, 4, 6]
        && weights.iter().zip(&expected).all(|(a, b)| (a - b).abs() < 1e-12);
    let detail = format!("{} points, levels {levels:?} (x sqrt(10)), weights x16 {:?}", pr.points.len(), weights
        .iter()
        .map(|w| w * 16.0)
        .collect::<Vec<_>>());
    report("partial-response 49-QAM", t, Duration::from_secs(1), ok, &detail);
}

#[test]
fn bandwidth_equivalence() {
    let _g = lock();
    let t = Instant::now();
    let mut ftn = LinkConfig::ftn16qam();
    let mut pcs = LinkConfig::pcs64qam_mb();
    ftn.info_bits = 1 << 15;
    pcs.info_bits = 1 << 15;
    let bw_ftn = occupied_bandwidth(&transmit_waveform(&ftn, 0).unwrap().signal, 0.99).unwrap();
    let bw_pcs = occupied_bandwidth(&transmit_waveform(&pcs, 0).unwrap().signal, 0.99).unwrap();
    let rel = (bw_ftn / bw_pcs - 1.0).abs();
    let detail = format!(
        "99% bandwidth FTN {:.3} GHz, Nyquist {:.3} GHz, relative difference {:.3}%",
        bw_ftn / 1e9,
        bw_pcs / 1e9,
        100.0 * rel
    );
    report("bandwidth equivalence", t, Duration::from_secs(10), rel <= 0.03, &detail);
}

#[test]
fn shaping_solver() {
    let _g = lock();
    let t = Instant::now();
    let mb = solve_mb(&AMPLITUDES, 5.0).unwrap();
    let ivmb = solve_ivmb(&AMPLITUDES, 5.0).unwrap();
    let uniform = AMPLITUDES.iter().map(|a| a * a).sum::<f64>() / AMPLITUDES.len() as f64;
    let e = |p: &[f64]| p.iter().zip(AMPLITUDES).map(|(p, a)| p * a * a).sum::<f64>();
    let h = |p: &[f64]| 2.0 * (1.0 - p.iter().filter(|&&q| q > 0.0).map(|q| q * q.log2()).sum::<f64>());
    let (h_mb, h_iv) = (h(&mb.probabilities), h(&ivmb.probabilities));
    let (e_mb, e_iv) = (e(&mb.probabilities), e(&ivmb.probabilities));
    let ok = (h_mb - 5.0).abs() <= 1e-9 && (h_iv - 5.0).abs() <= 1e-9 && e_iv > uniform && uniform > e_mb;
    let detail = format!(
        "H_MB = {h_mb:.12}, H_IvMB = {h_iv:.12}; energy per dimension IvMB {e_iv:.3} > uniform {uniform:.3} > MB {e_mb:.3}"
    );
    report("shaping solver", t, Duration::from_secs(1), ok, &detail);
}

#[test]
fn ccdm_roundtrip() {
    let _g = lock();
    let t = Instant::now();
    let spec = solve_mb(&AMPLITUDES, 5.0).unwrap();
    let composition = composition_for(&spec, spec.block_len).unwrap();
    let k = ccdm_info_bits(&composition);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut roundtrip = 0;
    let mut composition_ok = 0;
    for _ in 0..1000 {
        let bits: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
        let block = ccdm_match(&bits, &composition).unwrap();
        let mut counts = vec![0usize; composition.len()];
        for &a in &block {
            counts[a] += 1;
        }
        composition_ok += usize::from(counts == composition);
        roundtrip += usize::from(ccdm_dematch(&block, &composition).unwrap() == bits);
    }
    let detail = format!(
        "{roundtrip}/1000 blocks recovered, {composition_ok}/1000 match composition {composition:?} ({k} bits per block)"
    );
    report("CCDM roundtrip", t, Duration::from_secs(30), roundtrip == 1000 && composition_ok == 1000, &detail);
}

/// Per-bit LLRs of a memoryless PAM4 symbol with Gray labels 00, 01, 11, 10.
fn memoryless_llrs(y: f64, levels: &[f64], noise_var: f64) -> [f64; 2] {
    const LABELS: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 1], [1, 0]];
    let metric: Vec<f64> = levels.iter().map(|x| -(y - x) * (y - x) / (2.0 * noise_var)).collect();
    let logsum = |bit: usize, value: u8| {
        let terms: Vec<f64> = (0..4).filter(|&i| LABELS[i][bit] == value).map(|i| metric[i]).collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    };
    [0, 1].map(|b| (logsum(b, 0) - logsum(b, 1)).clamp(-LLR_CLAMP, LLR_CLAMP))
}

#[test]
fn bcjr_matches_memoryless_demapper() {
    let _g = lock();
    let t = Instant::now();
    let levels = [-3.0, -1.0, 1.0, 3.0];
    let trellis = build_trellis(&levels, &[1.0]).unwrap();
    let noise_var: f64 = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, noise_var.sqrt()).unwrap();
    let y: Vec<f64> = (0..10_000).map(|_| levels[rng.random_range(0..4)] + noise.sample(&mut rng)).collect();
    let llrs = bcjr_detect(&y, &trellis, &vec![0.0; 2 * y.len()], noise_var).unwrap();
    let max_diff = y
        .iter()
        .enumerate()
        .flat_map(|(k, &v)| {
            let oracle = memoryless_llrs(v, &levels, noise_var);
            [(llrs[2 * k] - oracle[0]).abs(), (llrs[2 * k + 1] - oracle[1]).abs()]
        })
        .fold(0.0, f64::max);
    let detail = format!("max |LLR difference| over 10^4 symbols = {max_diff:.3e}");
    report("BCJR memoryless oracle", t, Duration::from_secs(10), max_diff <= 1e-9, &detail);
}

fn ftn_config(receiver: ReceiverMode) -> LinkConfig {
    LinkConfig { receiver, ..LinkConfig::ftn16qam() }
}

const SEEDS: std::ops::Range<u64> = 0..20;

#[test]
fn turbo_convergence() {
    let _g = lock();
    let t = Instant::now();
    let config = ftn_config(ReceiverMode::Turbo(6));
    let seeds: Vec<u64> = SEEDS.collect();
    let calibrated = 2.0;
    let margins = [calibrated, 4.0, 6.0];
    let points = summarize(&sweep(&config, &margins, &seeds).unwrap());
    let at = |m: f64| points.iter().find(|p| p.margin_db == m).unwrap();
    let curve = &at(calibrated).per_iteration_ber;
    let monotone = curve.len() == 6 && curve.windows(2).all(|w| w[1] <= w[0]);
    let bits = config.info_bits * seeds.len();
    let error_free: Vec<f64> = points
        .iter()
        .filter(|p| p.failures == 0 && p.per_iteration_ber.get(3) == Some(&0.0))
        .map(|p| p.margin_db)
        .collect();
    let detail = format!(
        "mean BER per iteration at margin {calibrated} dB: {}; iteration 4 error-free over {bits} bits at margins {error_free:?}",
        curve.iter().map(|b| format!("{b:.2e}")).collect::<Vec<_>>().join(" ")
    );
    report(
        "turbo convergence",
        t,
        Duration::from_secs(20 * 60),
        monotone && !error_free.is_empty() && bits >= 100_000,
        &detail,
    );
}

fn curve_text(points: &[SweepPoint]) -> String {
    points.iter().map(|p| format!("{:.1}:{:.2e}", p.margin_db, p.post_fec_ber)).collect::<Vec<_>>().join(" ")
}

#[test]
fn ordering_reproduction() {
    let _g = lock();
    let t = Instant::now();
    let seeds: Vec<u64> = SEEDS.collect();

    let pcs_margins = [0.0, 1.0, 2.0, 3.0, 4.0];
    let mb = summarize(&sweep(&LinkConfig::pcs64qam_mb(), &pcs_margins, &seeds).unwrap());
    let ivmb_config = LinkConfig::pcs64qam_ivmb();
    assert_eq!(
        ivmb_config.channel.snr_db_at_zero_margin,
        LinkConfig::pcs64qam_mb().channel.snr_db_at_zero_margin
    );
    let ivmb = summarize(&sweep(&ivmb_config, &pcs_margins, &seeds).unwrap());
    let mb_wins = mb.iter().zip(&ivmb).all(|(a, b)| a.post_fec_ber < b.post_fec_ber);

    let ftn_margins: Vec<f64> = (0..=8).map(f64::from).collect();
    let turbo = summarize(&sweep(&ftn_config(ReceiverMode::Turbo(4)), &ftn_margins, &seeds).unwrap());
    let oneshot = summarize(&sweep(&ftn_config(ReceiverMode::FecOneShot), &ftn_margins, &seeds).unwrap());
    let m_turbo = margin_at_ber(&turbo, 1e-3);
    let m_oneshot = margin_at_ber(&oneshot, 1e-3);
    let m_mb = margin_at_ber(&mb, 1e-3);
    let turbo_wins = matches!((m_turbo, m_oneshot), (MarginEstimate::Measured(a), MarginEstimate::Measured(b)) if a <= b);

    let snr = |m: MarginEstimate, c: &LinkConfig| m.value().map(|v| v + c.channel.snr_db_at_zero_margin);
    let ftn_snr = snr(m_turbo, &LinkConfig::ftn16qam());
    let mb_snr = snr(m_mb, &LinkConfig::pcs64qam_mb());
    println!("  MB post-FEC BER by margin:    {}", curve_text(&mb));
    println!("  IvMB post-FEC BER by margin:  {}", curve_text(&ivmb));
    println!("  FTN turbo(4) by margin:       {}", curve_text(&turbo));
    println!("  FTN one-shot by margin:       {}", curve_text(&oneshot));
    if let (Some(f), Some(m)) = (ftn_snr, mb_snr) {
        println!("  required SNR at BER 1e-3: FTN turbo(4) {f:.2} dB, MB PCS {m:.2} dB, FTN advantage {:.2} dB", m - f);
    }
    let detail = format!(
        "MB below IvMB at every margin: {mb_wins}; margin at BER 1e-3 turbo(4) {:?} vs one-shot {:?}, gap {:?} dB",
        m_turbo.value(),
        m_oneshot.value(),
        m_turbo.value().zip(m_oneshot.value()).map(|(a, b)| b - a)
    );
    report("format and receiver ordering", t, Duration::from_secs(60 * 60), mb_wins && turbo_wins, &detail);
}

#[test]
fn roundtrip_and_invertibility() {
    let _g = lock();
    let t = Instant::now();
    let ftn = LinkConfig::ftn16qam();
    let tx = transmit_waveform(&ftn, 0).unwrap();
    let at_adc = resample(&tx.frame, ftn.adc_rate_hz).unwrap();

    let cd = ChannelConfig::default();
    let back = compensate_cd(&apply_cd(&at_adc, &cd).unwrap(), &cd).unwrap();
    let cd_rms = (back.samples.iter().zip(&at_adc.samples).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
        / at_adc.len() as f64)
        .sqrt();

    let mut worst_foe: f64 = 0.0;
    let mut foe_failures = 0;
    for seed in 0..100 {
        let channel = ChannelConfig {
            snr_db_at_zero_margin: 5.0,
            cfo_hz: 500e6,
            seed,
            symbol_rate_hz: Some(ftn.baud),
            ..ChannelConfig::default()
        };
        let rx = apply_channel(&at_adc, &channel).unwrap();
        match estimate_fo_pilot(&rx, &ftn.layout, ftn.foe_window_hz) {
            Ok(f) => worst_foe = worst_foe.max((f - 500e6).abs()),
            Err(_) => foe_failures += 1,
        }
    }

    let mut noise_free_errors = Vec::new();
    for format in [Format::Ftn16Qam, Format::Pcs64QamMb, Format::Pcs64QamIvmb] {
        let mut c = LinkConfig::preset(format);
        c.channel.noise_free = true;
        let r = run_trial(&c, 0.0, 3);
        noise_free_errors.push((format, r.error_count, r.pre_fec_ber, r.failure));
    }
    let clean = noise_free_errors.iter().all(|(_, e, pre, f)| *e == 0 && *pre == 0.0 && f.is_none());
    let ok = cd_rms <= 1e-8 && foe_failures == 0 && worst_foe <= 1e6 && clean;
    let detail = format!(
        "CD roundtrip RMS {cd_rms:.2e}; FOE worst error {:.1} kHz over 100 seeds at 5 dB ({foe_failures} failures); noise-free {:?}",
        worst_foe / 1e3,
        noise_free_errors.iter().map(|(f, e, pre, _)| format!("{f}: {e} errors, pre-FEC {pre}")).collect::<Vec<_>>()
    );
    report("roundtrip and invertibility", t, Duration::from_secs(10 * 60), ok, &detail);
}

#[test]
fn post_filter_whitening() {
    let _g = lock();
    let t = Instant::now();
    let config = LinkConfig::ftn16qam();
    let margin = 1.5;
    let mut ratios = Vec::new();
    for seed in 0..5 {
        let trial = equalize_trial(&config, margin, seed).unwrap();
        let eq = &trial.equalized;
        let pf = estimate_post_filter(&eq.pr_symbols, &eq.pr_reference).unwrap();
        ratios.push((pf.lag1_before, pf.lag1_after, pf.lag1_before.abs() / pf.lag1_after.abs()));
    }
    let ok = ratios.iter().all(|r| r.2 >= 10.0);
    let detail = format!(
        "SNR {:.1} dB, lag-1 before/after/ratio per seed: {}",
        config.channel.snr_db_at_zero_margin + margin,
        ratios.iter().map(|(b, a, r)| format!("{b:.3}/{a:.4}/{r:.1}x")).collect::<Vec<_>>().join(", ")
    );
    report("post-filter whitening", t, Duration::from_secs(5 * 60), ok, &detail);
}
