//! Probabilistic constellation shaping for PCS-64QAM.
//!
//! [`solve_mb`] and [`solve_ivmb`] find the amplitude distribution for a
//! target 2D entropy, [`composition_for`] quantizes it to a constant
//! composition, the CCDM maps bits to amplitude blocks of that composition,
//! and [`pas_encode`]/[`pas_decode`] wrap everything around a systematic FEC.

mod ccdm;
mod distribution;
mod pas;

pub use ccdm::{ccdm_dematch, ccdm_info_bits, ccdm_match, multinomial};
pub use distribution::{composition_for, entropy_bits, solve_ivmb, solve_mb, ShapingFamily, ShapingSpec};
pub use pas::{pas_decode, pas_demap_llrs, pas_encode, PasDecoded, PasFrame, PasInput, PasLayout};
