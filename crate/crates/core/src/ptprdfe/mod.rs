//! Phase-tracking partial-response decision-feedback equalizer.
//!
//! A fractionally spaced feedforward filter converges the received signal to
//! a partial-response version of the transmitted symbols while a
//! decision-directed loop removes carrier phase. Decisions are taken on the
//! original alphabet after the known part of the partial response has been
//! subtracted using past decisions.

mod equalizer;
mod target;

pub use equalizer::{equalize, train, EqualizerConfig, EqualizerOutput, EqualizerState, TrainingReport};
pub use target::{pr_expand, PrTarget};
