use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseKind {
    /// Root-raised-cosine; taps scaled to unit energy.
    Rrc,
    /// Raised-cosine; taps scaled to unit peak, so it equals an RRC cascaded with itself.
    Rc,
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseKind::Rrc => "rrc",
            PulseKind::Rc => "rc",
        })
    }
}

impl FromStr for PulseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rrc" => Ok(PulseKind::Rrc),
            "rc" => Ok(PulseKind::Rc),
            _ => Err(Error::invalid(format!("unknown pulse kind `{s}`"))),
        }
    }
}

/// Root-raised-cosine impulse response at `t` symbol periods (unit continuous energy).
pub fn rrc_value(t: f64, alpha: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    let edge = 1.0 / (4.0 * alpha);
    if ((t.abs() - edge) / edge).abs() < 1e-9 {
        let a = PI / (4.0 * alpha);
        return alpha / SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - alpha)).sin() + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
    let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
    num / den
}

/// Raised-cosine impulse response at `t` symbol periods (unit peak).
pub fn rc_value(t: f64, alpha: f64) -> f64 {
    let sinc = |x: f64| if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    let edge = 1.0 / (2.0 * alpha);
    if ((t.abs() - edge) / edge).abs() < 1e-9 {
        return PI / 4.0 * sinc(edge);
    }
    sinc(t) * (PI * alpha * t).cos() / (1.0 - (2.0 * alpha * t).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub rolloff: f64,
    /// Filter length in symbols; taps cover `[-span/2, span/2]`.
    pub span: usize,
    pub sps: usize,
}

impl PulseShape {
    pub fn rrc(rolloff: f64, span: usize, sps: usize) -> Self {
        PulseShape {
            kind: PulseKind::Rrc,
            rolloff,
            span,
            sps,
        }
    }

    pub fn rc(rolloff: f64, span: usize, sps: usize) -> Self {
        PulseShape {
            kind: PulseKind::Rc,
            rolloff,
            span,
            sps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::invalid(format!(
                "roll-off must lie in (0, 1], got {}",
                self.rolloff
            )));
        }
        if self.sps < 2 {
            return Err(Error::invalid("at least 2 samples per symbol required"));
        }
        if self.span < 2 || !self.span.is_multiple_of(2) {
            return Err(Error::invalid("span must be an even number of symbols >= 2"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.span * self.sps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Group delay in samples.
    pub fn delay(&self) -> usize {
        self.span * self.sps / 2
    }

    /// Symmetric taps of length `span * sps + 1`.
    pub fn taps(&self) -> Vec<f64> {
        let d = self.delay() as f64;
        let sps = self.sps as f64;
        let raw: Vec<f64> = (0..self.len())
            .map(|k| {
                let t = (k as f64 - d) / sps;
                match self.kind {
                    PulseKind::Rrc => rrc_value(t, self.rolloff),
                    PulseKind::Rc => rc_value(t, self.rolloff),
                }
            })
            .collect();
        let scale = match self.kind {
            PulseKind::Rrc => raw.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PulseKind::Rc => raw[self.delay()],
        };
        raw.into_iter().map(|v| v / scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rrc_taps_unit_energy_and_symmetric() {
        let p = PulseShape::rrc(0.2, 32, 8);
        let h = p.taps();
        assert_eq!(h.len(), 257);
        let e: f64 = h.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-12);
        for k in 0..h.len() {
            assert_eq!(h[k], h[h.len() - 1 - k]);
        }
    }

    #[test]
    fn rc_zero_crossings() {
        let p = PulseShape::rc(0.2, 16, 4);
        let h = p.taps();
        assert_eq!(h[p.delay()], 1.0);
        for n in 1..8 {
            assert!(h[p.delay() + 4 * n].abs() < 1e-15);
        }
    }

    #[test]
    fn singular_points_continuous() {
        let a = 0.25;
        let t = 1.0 / (4.0 * a);
        assert!((rrc_value(t, a) - rrc_value(t + 1e-7, a)).abs() < 1e-5);
        let t = 1.0 / (2.0 * a);
        assert!((rc_value(t, a) - rc_value(t + 1e-7, a)).abs() < 1e-5);
    }

    #[test]
    fn validation() {
        assert!(PulseShape::rrc(0.0, 32, 8).validate().is_err());
        assert!(PulseShape::rrc(0.2, 32, 1).validate().is_err());
        assert!(PulseShape::rrc(0.2, 31, 8).validate().is_err());
        assert!(PulseShape::rrc(1.0, 2, 2).validate().is_ok());
    }
}
