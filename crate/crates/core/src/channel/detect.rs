//! Minimum-distance (ML under AWGN) symbol decisions. Ties go to the lowest index.

use num_complex::Complex64;

use crate::constellation::{Constellation, Symbol4D};

/// Precomputed decision structure for one constellation.
#[derive(Debug, Clone)]
pub enum Detector {
    /// Points sorted by their first coordinate; the search expands outward from the received
    /// value and stops once the coordinate gap alone exceeds the best distance.
    Joint {
        sorted: Vec<([f64; 4], usize)>,
    },
    PerPolarization {
        x: Vec<Complex64>,
        y: Vec<Complex64>,
    },
}

fn nearest_2d(set: &[Complex64], r: Complex64) -> usize {
    let mut best = 0;
    let mut bd = f64::INFINITY;
    for (i, s) in set.iter().enumerate() {
        let d = (s - r).norm_sqr();
        if d < bd {
            bd = d;
            best = i;
        }
    }
    best
}

#[inline]
fn d2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    let d3 = a[3] - b[3];
    d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3
}

impl Detector {
    pub fn new(c: &Constellation) -> Self {
        match c.factors() {
            Some(f) => Detector::PerPolarization {
                x: f.x.clone(),
                y: f.y.clone(),
            },
            None => Detector::joint_only(c),
        }
    }

    /// Joint 4-D detector even for product constellations.
    pub fn joint_only(c: &Constellation) -> Self {
        let mut sorted: Vec<([f64; 4], usize)> = c
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.coords(), i))
            .collect();
        sorted.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.1.cmp(&b.1)));
        Detector::Joint { sorted }
    }

    pub fn detect(&self, r: &[f64; 4]) -> usize {
        match self {
            Detector::PerPolarization { x, y } => {
                let ix = nearest_2d(x, Complex64::new(r[0], r[1]));
                let iy = nearest_2d(y, Complex64::new(r[2], r[3]));
                ix * y.len() + iy
            }
            Detector::Joint { sorted } => {
                let start = sorted.partition_point(|p| p.0[0] < r[0]);
                let mut best = (f64::INFINITY, usize::MAX);
                let consider = |p: &([f64; 4], usize), best: &mut (f64, usize)| {
                    let d = d2(&p.0, r);
                    if d < best.0 || (d == best.0 && p.1 < best.1) {
                        *best = (d, p.1);
                    }
                };
                let (mut lo, mut hi) = (start, start);
                let (mut lo_open, mut hi_open) = (lo > 0, hi < sorted.len());
                while lo_open || hi_open {
                    if hi_open {
                        let p = &sorted[hi];
                        let gap = p.0[0] - r[0];
                        if gap * gap > best.0 {
                            hi_open = false;
                        } else {
                            consider(p, &mut best);
                            hi += 1;
                            hi_open = hi < sorted.len();
                        }
                    }
                    if lo_open {
                        let p = &sorted[lo - 1];
                        let gap = r[0] - p.0[0];
                        if gap * gap > best.0 {
                            lo_open = false;
                        } else {
                            consider(p, &mut best);
                            lo -= 1;
                            lo_open = lo > 0;
                        }
                    }
                }
                best.1
            }
        }
    }

    pub fn detect_symbol(&self, r: &Symbol4D) -> usize {
        self.detect(&r.coords())
    }
}

/// Decision for a single received sample. Build a [`Detector`] for repeated use.
pub fn detect_ml(c: &Constellation, received: &Symbol4D) -> usize {
    Detector::new(c).detect_symbol(received)
}

/// Exhaustive joint 4-D nearest-neighbour scan (reference decision).
pub fn detect_exhaustive(c: &Constellation, received: &Symbol4D) -> usize {
    let r = received.coords();
    let mut best = (f64::INFINITY, 0);
    for (i, p) in c.points().iter().enumerate() {
        let d = d2(&p.coords(), &r);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}
