//! Classical 2-D modulations in dual operation, and the bi-orthogonal 4-D set.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::{Constellation, Symbol4D};
use crate::error::{Error, Result};

/// Outer-to-inner ring radius ratio of the 4+12 APSK.
pub const APSK16_RING_RATIO: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassicKind {
    Qpsk,
    Psk8,
    Psk3,
    Qam16,
    Apsk16,
    HexQam8,
}

impl ClassicKind {
    pub const ALL: [ClassicKind; 6] = [
        ClassicKind::Qpsk,
        ClassicKind::Psk8,
        ClassicKind::Psk3,
        ClassicKind::Qam16,
        ClassicKind::Apsk16,
        ClassicKind::HexQam8,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ClassicKind::Qpsk => "QPSK",
            ClassicKind::Psk8 => "8-PSK",
            ClassicKind::Psk3 => "3-PSK",
            ClassicKind::Qam16 => "16-QAM",
            ClassicKind::Apsk16 => "16-APSK",
            ClassicKind::HexQam8 => "8-hex-QAM",
        }
    }

    /// The 2-D symbol set, unnormalized.
    pub fn points_2d(&self) -> Vec<Complex64> {
        match self {
            ClassicKind::Qpsk => psk(4, FRAC_PI_4),
            ClassicKind::Psk8 => psk(8, 0.0),
            ClassicKind::Psk3 => psk(3, FRAC_PI_2),
            ClassicKind::Qam16 => {
                let lv = [-3.0, -1.0, 1.0, 3.0];
                lv.iter()
                    .flat_map(|&i| lv.iter().map(move |&q| Complex64::new(i, q)))
                    .collect()
            }
            ClassicKind::Apsk16 => {
                let mut v = psk(4, FRAC_PI_4);
                v.extend(
                    psk(12, PI / 12.0)
                        .into_iter()
                        .map(|z| z * APSK16_RING_RATIO),
                );
                v
            }
            ClassicKind::HexQam8 => {
                // d/2 * {-1, 1, -j sqrt3, j sqrt3, -2 - j sqrt3, -2 + j sqrt3, 2 - j sqrt3, 2 + j sqrt3}
                // with spacing d = 2.
                let r3 = 3f64.sqrt();
                vec![
                    Complex64::new(-1.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, -r3),
                    Complex64::new(0.0, r3),
                    Complex64::new(-2.0, -r3),
                    Complex64::new(-2.0, r3),
                    Complex64::new(2.0, -r3),
                    Complex64::new(2.0, r3),
                ]
            }
        }
    }
}

impl fmt::Display for ClassicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = s.to_ascii_lowercase().replace(['-', '_', ' '], "");
        Ok(match k.as_str() {
            "qpsk" => ClassicKind::Qpsk,
            "8psk" | "psk8" => ClassicKind::Psk8,
            "3psk" | "psk3" => ClassicKind::Psk3,
            "16qam" | "qam16" => ClassicKind::Qam16,
            "16apsk" | "apsk16" => ClassicKind::Apsk16,
            "8hexqam" | "hexqam8" | "hex8qam" => ClassicKind::HexQam8,
            _ => return Err(Error::invalid(format!("unknown 2-D modulation `{s}`"))),
        })
    }
}

fn psk(m: usize, phase0: f64) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, phase0 + TAU * k as f64 / m as f64))
        .collect()
}

/// The chosen 2-D modulation on both polarizations, detected per polarization and normalized
/// to unit average 4-D energy.
pub fn generate_classic_dual(kind: ClassicKind) -> Constellation {
    let s = kind.points_2d();
    Constellation::product(format!("dual {}", kind.label()), s.clone(), s)
        .expect("classic sets are distinct")
        .normalized()
}

/// Dual QPSK split by the parity of the phase-index sum: `(even, odd)`, eight points each,
/// at unit energy. Index `i` of polarization X and `j` of Y pair into point `(i, j)`.
pub fn qpsk_parity_sets() -> (Vec<Symbol4D>, Vec<Symbol4D>) {
    let q: Vec<Complex64> = psk(4, FRAC_PI_4)
        .into_iter()
        .map(|z| z * FRAC_1_SQRT_2)
        .collect();
    let mut even = Vec::with_capacity(8);
    let mut odd = Vec::with_capacity(8);
    for (i, &cx) in q.iter().enumerate() {
        for (j, &cy) in q.iter().enumerate() {
            let s = Symbol4D::new(cx, cy);
            if (i + j) % 2 == 0 {
                even.push(s);
            } else {
                odd.push(s);
            }
        }
    }
    (even, odd)
}

/// The eight-point bi-orthogonal constellation. Unrotated: `±1` on each of the four axes.
/// Rotated: the even-parity half of dual QPSK, constant amplitude on each polarization.
pub fn generate_biorthogonal(rotated: bool) -> Constellation {
    let points = if rotated {
        qpsk_parity_sets().0
    } else {
        (0..4)
            .flat_map(|axis| {
                [1.0, -1.0].map(|s| {
                    let mut c = [0.0; 4];
                    c[axis] = s;
                    Symbol4D::from_coords(c)
                })
            })
            .collect()
    };
    let name = if rotated { "bi-orthogonal" } else { "bi-orthogonal (axes)" };
    Constellation::joint(name, points)
        .expect("bi-orthogonal points are distinct")
        .normalized()
}
