//! Post-filter whitening, BCJR detection on the original PAM alphabet, the
//! FEC code, and the iterative soft exchange between them.

mod detector;
mod fec;
mod interleaver;
mod iterate;
pub mod llr;
mod postfilter;
mod trellis;

pub use detector::{bcjr_detect, bcjr_detect_with, gray_bit};
pub use fec::{fec_bcjr_decode, fec_encode, FecCodec, FecDecoded, MotherPosterior, TAIL_BITS};
pub use interleaver::Interleaver;
pub use iterate::{coded_bits_to_levels, turbo_equalize, TurboEqualizer, TurboOutput};
pub use llr::{MapAlgorithm, LLR_CLAMP};
pub use postfilter::{
    apply_causal, effective_filter, estimate_post_filter, lag1_correlation, PostFilterEstimate,
    MIN_POST_FILTER_SYMBOLS,
};
pub use trellis::{build_trellis, build_trellis_capped, TrellisSpec, DEFAULT_STATE_CAP};
