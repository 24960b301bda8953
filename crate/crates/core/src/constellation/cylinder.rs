//! Cylinder-based constellations: constant amplitude on each polarization, with the phase
//! pairs `(phi_x, phi_y)` laid out as a dense lattice on the phase torus.
//!
//! A torus lattice of `p * q` points is `{ 2pi * (i/p + j*s/(p*q), j/q) }` for
//! `0 <= i < p`, `0 <= j < q`, shear `0 <= s < q`. Every such set closes on the torus; the
//! generator picks the `(p, q, s)` with the largest 4-D minimum distance, which is the
//! hexagonal grid squeezed as little as the point count allows.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{Constellation, Symbol4D};
use crate::error::{Error, Result};

/// One torus lattice layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    /// Points per row (along `phi_x`).
    pub columns: usize,
    /// Rows (along `phi_y`).
    pub rows: usize,
    /// Row-to-row shift of `phi_x`, in units of `2pi / (columns * rows)`.
    pub shear: usize,
}

impl TorusGrid {
    pub fn phases(&self) -> Vec<(f64, f64)> {
        let (p, q) = (self.columns as f64, self.rows as f64);
        let mut out = Vec::with_capacity(self.columns * self.rows);
        for j in 0..self.rows {
            for i in 0..self.columns {
                let fx = (i as f64 / p + (j * self.shear) as f64 / (p * q)).fract();
                out.push((TAU * fx, TAU * j as f64 / q));
            }
        }
        out
    }

    pub fn points(&self, amp_x: f64, amp_y: f64) -> Vec<Symbol4D> {
        self.phases()
            .into_iter()
            .map(|(px, py)| {
                Symbol4D::new(Complex64::from_polar(amp_x, px), Complex64::from_polar(amp_y, py))
            })
            .collect()
    }

    /// `(min squared distance, number of ordered pairs at it)` for the given amplitudes.
    /// Distances only depend on phase differences, so point 0 suffices.
    fn score(&self, amp_x: f64, amp_y: f64) -> (f64, usize) {
        let pts = self.points(amp_x, amp_y);
        let scale = amp_x * amp_x + amp_y * amp_y;
        let mut best = f64::INFINITY;
        let mut n = 0;
        for p in &pts[1..] {
            let d = pts[0].dist_sqr(p);
            if d < best - 1e-12 * scale {
                best = d;
                n = 1;
            } else if (d - best).abs() <= 1e-12 * scale {
                n += 1;
            }
        }
        (best, n)
    }
}

/// Best torus lattice for `count` points, or `None` if `count` has no factorization `p*q`
/// with `p, q >= 2`.
pub fn best_torus_grid(count: usize, amp_x: f64, amp_y: f64) -> Option<TorusGrid> {
    let mut best: Option<(TorusGrid, (f64, usize))> = None;
    let scale = amp_x * amp_x + amp_y * amp_y;
    for p in 2..=count / 2 {
        if !count.is_multiple_of(p) || count / p < 2 {
            continue;
        }
        let q = count / p;
        for s in 0..q {
            let g = TorusGrid {
                columns: p,
                rows: q,
                shear: s,
            };
            let sc = g.score(amp_x, amp_y);
            let better = match &best {
                None => true,
                Some((_, (d, n))) => {
                    sc.0 > d + 1e-12 * scale || ((sc.0 - d).abs() <= 1e-12 * scale && sc.1 < *n)
                }
            };
            if better {
                best = Some((g, sc));
            }
        }
    }
    best.map(|b| b.0)
}

/// Constant-amplitude 4-D PSK with phases on the best torus lattice. `amp_x` and `amp_y` set
/// the per-polarization amplitudes before unit-energy normalization.
pub fn generate_hex_cylinder_psk(count: usize, amp_x: f64, amp_y: f64) -> Result<Constellation> {
    if !(amp_x > 0.0 && amp_y > 0.0) {
        return Err(Error::invalid("cylinder amplitudes must be positive"));
    }
    let grid = best_torus_grid(count, amp_x, amp_y).ok_or_else(|| Error::InvalidCount {
        count,
        reason: "needs a factorization p*q with p, q >= 2".into(),
    })?;
    let c = Constellation::joint(format!("hex-cyl-{count}-PSK"), grid.points(amp_x, amp_y))?;
    Ok(c.normalized())
}
