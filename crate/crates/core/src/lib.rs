//! Four-dimensional (dual-polarization) constellations, symbol-level AWGN simulation,
//! pulse-shaped PAPR measurement and Gardner timing-recovery jitter analysis.

pub mod channel;
pub mod constellation;
pub mod experiment;
pub mod sync;
pub mod waveform;
mod error;

pub use error::{Error, Result};
