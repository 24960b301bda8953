//! Lattice amplitude modulation (LAM): D4 points carved by a sphere around the origin.

use std::cmp::Ordering;

use super::{Constellation, Symbol4D};
use crate::error::{Error, Result};

/// `(1/2, 1/2, 1/2, 1/2)` is a deep hole of D4; shifting by it frees the origin.
pub const DEEP_HOLE: [f64; 4] = [0.5; 4];

const MAX_ENUMERATED: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCarveSpec {
    /// Added to every lattice node before carving.
    pub offset: [f64; 4],
    pub target_count: usize,
    /// Initial enumeration radius; grown automatically when too small.
    pub search_radius_hint: f64,
    /// When false, a carve that would split the boundary energy shell fails with
    /// [`Error::CountUnreachable`] instead of applying the lexicographic tie-break.
    pub allow_partial_shell: bool,
}

impl LatticeCarveSpec {
    pub fn new(target_count: usize) -> Self {
        LatticeCarveSpec {
            offset: DEEP_HOLE,
            target_count,
            search_radius_hint: 2.0,
            allow_partial_shell: true,
        }
    }

    pub fn with_offset(mut self, offset: [f64; 4]) -> Self {
        self.offset = offset;
        self
    }

    pub fn full_shells_only(mut self) -> Self {
        self.allow_partial_shell = false;
        self
    }
}

/// Result of a carve, in lattice units (before normalization).
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCarve {
    /// Integer D4 nodes, in carve order.
    pub nodes: Vec<[i64; 4]>,
    /// `node + offset` for every node.
    pub shifted: Vec<[f64; 4]>,
    /// `(norm^2, population)` of every shell touched, inner first; the last shell may be
    /// only partly used.
    pub shells: Vec<(f64, usize)>,
    /// True when the boundary shell was split by the tie-break.
    pub partial_boundary: bool,
}

impl LatticeCarve {
    pub fn to_constellation(&self, name: impl Into<String>) -> Result<Constellation> {
        let pts = self.shifted.iter().map(|&c| Symbol4D::from_coords(c)).collect();
        Constellation::joint(name, pts)
    }
}

fn norm2(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn lex(a: &[f64; 4], b: &[f64; 4]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Lattice node, shifted point and squared norm.
type Node = ([i64; 4], [f64; 4], f64);

/// All D4 nodes `v` with `|v + offset|^2 <= r2`.
fn enumerate(offset: &[f64; 4], r2: f64) -> Option<Vec<Node>> {
    let r = r2.sqrt();
    let lo: Vec<i64> = offset.iter().map(|o| (-r - o).ceil() as i64).collect();
    let hi: Vec<i64> = offset.iter().map(|o| (r - o).floor() as i64).collect();
    let mut out = Vec::new();
    for a in lo[0]..=hi[0] {
        let pa = a as f64 + offset[0];
        let ra = pa * pa;
        if ra > r2 {
            continue;
        }
        for b in lo[1]..=hi[1] {
            let pb = b as f64 + offset[1];
            let rb = ra + pb * pb;
            if rb > r2 {
                continue;
            }
            for c in lo[2]..=hi[2] {
                let pc = c as f64 + offset[2];
                let rc = rb + pc * pc;
                if rc > r2 {
                    continue;
                }
                for d in lo[3]..=hi[3] {
                    if (a + b + c + d).rem_euclid(2) != 0 {
                        continue;
                    }
                    let pd = d as f64 + offset[3];
                    let rd = rc + pd * pd;
                    if rd <= r2 {
                        out.push(([a, b, c, d], [pa, pb, pc, pd], rd));
                        if out.len() > MAX_ENUMERATED {
                            return None;
                        }
                    }
                }
            }
        }
    }
    Some(out)
}

fn same_shell(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Carves the `target_count` shifted D4 nodes of smallest norm. Ties on the boundary shell
/// are broken by lexicographic order of the shifted coordinates.
pub fn carve_d4(spec: &LatticeCarveSpec) -> Result<LatticeCarve> {
    let m = spec.target_count;
    if m == 0 {
        return Err(Error::InvalidCount {
            count: 0,
            reason: "target_count must be at least 1".into(),
        });
    }
    if spec.search_radius_hint.is_nan() || spec.search_radius_hint <= 0.0 || spec.offset.iter().any(|o| !o.is_finite()) {
        return Err(Error::invalid("search radius must be positive and offset finite"));
    }
    let mut r2 = spec.search_radius_hint.powi(2).max(norm2(&spec.offset) + 1.0);
    let mut nodes = loop {
        match enumerate(&spec.offset, r2) {
            Some(v) if v.len() >= m => break v,
            Some(_) => r2 *= 2.0,
            None => {
                return Err(Error::CountUnreachable {
                    target: m,
                    shells: Vec::new(),
                })
            }
        }
    };
    nodes.sort_by(|a, b| a.2.total_cmp(&b.2));

    // Group into shells, lexicographic inside each shell.
    let mut shells: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    while start < nodes.len() {
        let n0 = nodes[start].2;
        let mut end = start + 1;
        while end < nodes.len() && same_shell(nodes[end].2, n0) {
            end += 1;
        }
        nodes[start..end].sort_by(|a, b| lex(&a.1, &b.1));
        shells.push((n0, end - start));
        start = end;
        if start >= m {
            break;
        }
    }
    let used: usize = shells.iter().map(|s| s.1).sum();
    let partial = used != m;
    if partial && !spec.allow_partial_shell {
        return Err(Error::CountUnreachable { target: m, shells });
    }
    nodes.truncate(m);
    Ok(LatticeCarve {
        nodes: nodes.iter().map(|n| n.0).collect(),
        shifted: nodes.iter().map(|n| n.1).collect(),
        shells,
        partial_boundary: partial,
    })
}

/// `M`-point LAM constellation, normalized to unit average energy.
pub fn generate_d4_lam(spec: &LatticeCarveSpec) -> Result<Constellation> {
    let carve = carve_d4(spec)?;
    Ok(carve
        .to_constellation(format!("{}-LAM", spec.target_count))?
        .normalized())
}
