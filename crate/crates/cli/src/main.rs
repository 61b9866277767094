//! Command-line front end: margin sweeps, format comparison and transmit spectra.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use linksim::harness::{
    margin_at_ber, summarize, sweep, transmit_waveform, write_csv, write_summary_csv, LinkConfig, SweepPoint,
};
use linksim::sigkit::{occupied_bandwidth, welch_psd};

#[derive(Parser)]
#[command(name = "linksim", version, about = "Coherent optical link simulator")]
struct Cli {
    /// Disable AWGN and laser phase noise (pipeline self-test).
    #[arg(long, global = true)]
    noise_free: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the power margin for one configuration and write per-trial CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Margin range in dB as start:stop:step, stop inclusive.
        #[arg(long, default_value = "0:4:0.5")]
        sweep: String,
        /// Number of seeds per margin (0..N); defaults to the config's seed list.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep several configurations and report margin deltas at a target BER.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        ber: f64,
        #[arg(long, default_value = "0:4:0.5")]
        sweep: String,
        #[arg(long)]
        seeds: Option<u64>,
        /// Optional per-(format, margin) summary CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the Welch PSD of the transmitted waveform.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in sweep {text:?}")))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { bail!("sweep must be start:stop:step, got {text:?}") };
    if step.is_nan() || step <= 0.0 || stop < start {
        bail!("sweep {text:?} is empty");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn load(path: &Path, noise_free: bool) -> Result<LinkConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = LinkConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    config.channel.noise_free |= noise_free;
    Ok(config)
}

fn seed_list(config: &LinkConfig, seeds: Option<u64>) -> Vec<u64> {
    seeds.map(|n| (0..n).collect()).unwrap_or_else(|| config.seeds.clone())
}

fn print_points(label: &str, points: &[SweepPoint]) {
    println!("{label}");
    println!("  margin_db  trials  failures  pre_fec_ber  post_fec_ber  evm_percent  per-iteration BER");
    for p in points {
        let iters: Vec<String> = p.per_iteration_ber.iter().map(|b| format!("{b:.2e}")).collect();
        println!(
            "  {:>9.2}  {:>6}  {:>8}  {:>11.3e}  {:>12.3e}  {:>11.2}  {}",
            p.margin_db,
            p.trials,
            p.failures,
            p.pre_fec_ber,
            p.post_fec_ber,
            p.evm_percent,
            iters.join(" ")
        );
    }
}

fn run_sweep(config: &LinkConfig, margins: &[f64], seeds: &[u64]) -> Result<(Vec<linksim::harness::MetricsRecord>, Vec<SweepPoint>)> {
    let records = sweep(config, margins, seeds)?;
    let points = summarize(&records);
    Ok((records, points))
}

fn main() -> Result<()> {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, sweep, seeds, out } => {
            let cfg = load(&config, cli.noise_free)?;
            let margins = parse_range(&sweep)?;
            let (records, points) = run_sweep(&cfg, &margins, &seed_list(&cfg, seeds))?;
            write_csv(BufWriter::new(File::create(&out)?), &records)?;
            print_points(&format!("{} [{}]", cfg.format, cfg.receiver), &points);
            println!("wrote {} rows to {}", records.len(), out.display());
        }
        Command::Compare { configs, ber, sweep, seeds, out } => {
            let margins = parse_range(&sweep)?;
            let mut rows = Vec::new();
            let mut results = Vec::new();
            for path in &configs {
                let cfg = load(path, cli.noise_free)?;
                let (_, points) = run_sweep(&cfg, &margins, &seed_list(&cfg, seeds))?;
                let label = format!("{} [{}] ({})", cfg.format, cfg.receiver, path.display());
                print_points(&label, &points);
                let base = cfg.channel.snr_db_at_zero_margin;
                results.push((label, margin_at_ber(&points, ber).value().map(|m| (m, base + m))));
                rows.extend(points.into_iter().map(|p| (cfg.format, p)));
            }
            println!("margin at BER {ber:e} (required SNR = calibration SNR + margin):");
            let reference = results[0].1;
            for (label, m) in &results {
                match (m, reference) {
                    (Some((m, snr)), Some((_, r))) => {
                        println!("  {label}: margin {m:.3} dB, SNR {snr:.3} dB (delta vs first {:+.3} dB)", snr - r)
                    }
                    (Some((m, snr)), None) => println!("  {label}: margin {m:.3} dB, SNR {snr:.3} dB"),
                    (None, _) => println!("  {label}: not measurable in this sweep"),
                }
            }
            if let Some(out) = out {
                write_summary_csv(BufWriter::new(File::create(&out)?), &rows)?;
                println!("wrote {} rows to {}", rows.len(), out.display());
            }
        }
        Command::Spectrum { config, out, seed } => {
            let cfg = load(&config, cli.noise_free)?;
            let tx = transmit_waveform(&cfg, seed)?;
            let psd = welch_psd(&tx.frame)?;
            let mut w = BufWriter::new(File::create(&out)?);
            writeln!(w, "freq_hz,psd_db_per_hz")?;
            for (f, d) in psd.freqs.iter().zip(&psd.density) {
                writeln!(w, "{f},{}", 10.0 * d.max(1e-300).log10())?;
            }
            w.flush()?;
            let bw = occupied_bandwidth(&tx.signal, 0.99)?;
            println!("{}: 99% occupied bandwidth {:.3} GHz (without pilot)", cfg.format, bw / 1e9);
            println!("wrote {} bins to {}", psd.freqs.len(), out.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_range("1:0:1").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
    }
}
