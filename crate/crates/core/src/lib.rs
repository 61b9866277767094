//! Simulator for amplifier-less short-reach coherent optical links.
//!
//! Two high-spectral-efficiency formats are compared on a common link model:
//! faster-than-Nyquist 16QAM received with a phase-tracking partial-response
//! DFE and a turbo equalizer whose trellis lives on the original PAM4
//! alphabet, and probabilistically shaped 64QAM (Maxwell-Boltzmann or its
//! inverse) carried by probabilistic amplitude shaping.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod error;
pub mod harness;
pub mod ptprdfe;
pub mod rxfront;
pub mod shaping;
pub mod sigkit;
pub mod turbo;
pub mod txchain;

pub use error::{Error, Result};
