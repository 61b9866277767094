//! Experiment orchestration: link configurations, single trials through the
//! whole transmitter/channel/receiver chain, margin sweeps and their CSV
//! output, and margin read-out at a target BER.

mod config;
mod report;
mod sweep;
mod trial;

pub use config::{Format, LinkConfig, ReceiverMode};
pub use report::{read_csv, write_csv, write_summary_csv, CSV_FIXED_COLUMNS};
pub use sweep::{interpolate_margin, margin_at_ber, summarize, sweep, MarginEstimate, SweepPoint};
pub use trial::{equalize_trial, run_trial, transmit_waveform, EqualizedTrial, MetricsRecord, TxWaveform};
