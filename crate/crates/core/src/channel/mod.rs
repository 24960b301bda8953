//! Symbol-level AWGN channel, ML detection, Monte-Carlo SER and analytic bounds.
//!
//! Power bookkeeping follows the dual-polarization convention: `Es` is the energy of the
//! whole 4-D symbol and the noise has `N0/2` per real dimension, so
//! `SNR = Es / (2 N0)`, `Es/N0 = 2 SNR` and `Eb/N0 = (2/b) SNR`.

mod awgn;
mod detect;
mod rng;
mod ser;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use awgn::{awgn_transmit, noise_sigma, Transmission};
pub use detect::{detect_exhaustive, detect_ml, Detector};
pub use rng::RngStream;
pub use ser::{
    simulate_ser, simulate_ser_blocks, union_bound, write_ser_csv, SerEstimate, SerRow, StopRule,
};

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnrConvention {
    /// `Ps / N = Es / (2 N0)`.
    Snr,
    EsN0,
    EbN0,
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SnrConvention::Snr => "SNR",
            SnrConvention::EsN0 => "Es/N0",
            SnrConvention::EbN0 => "Eb/N0",
        })
    }
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['/', '_'], "").as_str() {
            "snr" => Ok(SnrConvention::Snr),
            "esn0" => Ok(SnrConvention::EsN0),
            "ebn0" => Ok(SnrConvention::EbN0),
            _ => Err(Error::invalid(format!("unknown SNR convention `{s}`"))),
        }
    }
}

/// A signal-to-noise ratio in dB under a stated convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub value_db: f64,
    pub convention: SnrConvention,
    /// Bits per dual-polarization symbol; needed whenever Eb/N0 is involved.
    pub bits_per_symbol: Option<f64>,
}

impl SnrSpec {
    pub fn new(value_db: f64, convention: SnrConvention) -> Self {
        SnrSpec {
            value_db,
            convention,
            bits_per_symbol: None,
        }
    }

    pub fn with_bits(mut self, bits: f64) -> Self {
        self.bits_per_symbol = Some(bits);
        self
    }

    fn bits(&self) -> Result<f64> {
        match self.bits_per_symbol {
            Some(b) if b > 0.0 => Ok(b),
            _ => Err(Error::MissingBits),
        }
    }

    /// Linear factor `X = k * SNR` of each convention.
    fn factor(&self, conv: SnrConvention) -> Result<f64> {
        Ok(match conv {
            SnrConvention::Snr => 1.0,
            SnrConvention::EsN0 => 2.0,
            SnrConvention::EbN0 => 2.0 / self.bits()?,
        })
    }

    pub fn linear(&self) -> f64 {
        db_to_lin(self.value_db)
    }
}

/// Re-expresses `spec` in another convention.
pub fn convert_snr(spec: SnrSpec, target: SnrConvention) -> Result<SnrSpec> {
    let snr = spec.linear() / spec.factor(spec.convention)?;
    let out = snr * spec.factor(target)?;
    Ok(SnrSpec {
        value_db: lin_to_db(out),
        convention: target,
        bits_per_symbol: spec.bits_per_symbol,
    })
}

/// Eb/N0 in dB for an Es/N0 in dB.
pub fn esn0_to_ebn0_db(esn0_db: f64, bits_per_symbol: f64) -> f64 {
    esn0_db - lin_to_db(bits_per_symbol)
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Error probability of two independent detections that must both succeed:
/// `1 - (1 - p)^2 = 2p - p^2`.
pub fn dual_error_compose(p_single: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_single) {
        return Err(Error::DomainError(p_single));
    }
    Ok(p_single * (2.0 - p_single))
}

/// Es/N0 (dB) at which `curve` crosses `target_ser`, interpolating linearly in
/// (dB, log10 SER). The first bracketing pair of consecutive points wins; points with zero
/// SER cannot bracket.
pub fn snr_at_ser(curve: &[(f64, f64)], target_ser: f64) -> Result<f64> {
    if target_ser.is_nan() || target_ser <= 0.0 {
        return Err(Error::invalid("target SER must be positive"));
    }
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(hit) = pts.iter().find(|p| p.1 == target_ser) {
        return Ok(hit.0);
    }
    for w in pts.windows(2) {
        let ((x0, s0), (x1, s1)) = (w[0], w[1]);
        if s0 > target_ser && s1 < target_ser && s1 > 0.0 {
            let (l0, l1, lt) = (s0.log10(), s1.log10(), target_ser.log10());
            return Ok(x0 + (lt - l0) * (x1 - x0) / (l1 - l0));
        }
    }
    Err(Error::NoBracket {
        target: target_ser,
        curve: None,
    })
}
