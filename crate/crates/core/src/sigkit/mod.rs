//! Signal types and DSP primitives shared by every stage of the link.
//!
//! Everything here is a pure function of its inputs. Frames carry their own
//! sample rate so that rate changes can be checked at the call site.

mod fft;
mod fir;
mod frame;
mod resample;
mod rrc;
mod spectrum;

pub(crate) use fft::bin_frequency;
pub use fft::{fft_forward, fft_inverse};
pub use fir::{fir_filter, FirFilter};
pub use frame::{ComplexFrame, C64};
pub use resample::{rational_ratio, resample};
pub use rrc::{design_rrc, rrc_pulse};
pub use spectrum::{occupied_bandwidth, welch_psd, Psd, WELCH_SEGMENT_LEN};
