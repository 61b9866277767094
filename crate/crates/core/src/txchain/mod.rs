//! Transmit side: constellations, Gray mapping, FTN/Nyquist pulse shaping,
//! pilot tone and frame layout.

mod constellation;
mod frame;
mod pilot;
mod pulse;

pub use constellation::{gray_decode, qam_map, Constellation};
pub use frame::{build_frame, qpsk_preamble, FrameLayout};
pub use pilot::insert_pilot_tone;
pub use pulse::{ftn_shape, matched_filter, normalize_power, DEFAULT_SPAN};
