//! Four-dimensional (dual-polarization) constellations.
//!
//! A symbol is a pair of complex amplitudes, one per polarization. All
//! generators return constellations normalized to unit average energy; the
//! channel applies the Es scaling.

mod classic;
mod cylinder;
pub mod io;
mod lattice;
mod sphere;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use classic::{generate_biorthogonal, generate_classic_dual, qpsk_parity_sets, ClassicKind};
pub use cylinder::{best_torus_grid, generate_hex_cylinder_psk, TorusGrid};
pub use lattice::{carve_d4, generate_d4_lam, LatticeCarve, LatticeCarveSpec, DEEP_HOLE};
pub use sphere::{generate_sphere_4dpsk, load_sphere_packing, PackingParams, SpherePacking};

/// Minimum 4-D separation (after unit-energy normalization) for two points to count as distinct.
pub const DISTINCT_EPS: f64 = 1e-9;

/// One dual-polarization symbol.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Symbol4D {
    pub x: Complex64,
    pub y: Complex64,
}

impl Symbol4D {
    pub const fn new(x: Complex64, y: Complex64) -> Self {
        Symbol4D { x, y }
    }

    /// Builds a symbol from `[xI, xQ, yI, yQ]`.
    pub const fn from_coords(c: [f64; 4]) -> Self {
        Symbol4D {
            x: Complex64::new(c[0], c[1]),
            y: Complex64::new(c[2], c[3]),
        }
    }

    pub const fn coords(&self) -> [f64; 4] {
        [self.x.re, self.x.im, self.y.re, self.y.im]
    }

    pub fn energy(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn scale(&self, k: f64) -> Self {
        Symbol4D::new(self.x * k, self.y * k)
    }

    pub fn dist_sqr(&self, other: &Symbol4D) -> f64 {
        (self.x - other.x).norm_sqr() + (self.y - other.y).norm_sqr()
    }
}

/// How a receiver decides on symbols of this constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionMode {
    /// Nearest neighbour in 4-D.
    Joint4D,
    /// Independent nearest neighbour on each polarization (dual operation).
    PerPolarization,
}

impl DetectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMode::Joint4D => "joint4d",
            DetectionMode::PerPolarization => "per_polarization",
        }
    }
}

impl fmt::Display for DetectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DetectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "joint4d" | "joint" => Ok(DetectionMode::Joint4D),
            "per_polarization" | "perpolarization" | "dual" => Ok(DetectionMode::PerPolarization),
            other => Err(Error::invalid(format!("unknown detection mode `{other}`"))),
        }
    }
}

/// The 2-D factor sets of a product constellation. Point `i * y.len() + j` is `(x[i], y[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFactors {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

/// A finite set of 4-D symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Symbol4D>,
    bits_per_symbol: f64,
    factors: Option<ProductFactors>,
}

impl Constellation {
    /// A constellation detected jointly in 4-D. Fails on coincident points.
    pub fn joint(name: impl Into<String>, points: Vec<Symbol4D>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCount {
                count: 0,
                reason: "constellation needs at least one point".into(),
            });
        }
        check_distinct(&points)?;
        let bits = (points.len() as f64).log2();
        Ok(Constellation {
            name: name.into(),
            points,
            bits_per_symbol: bits,
            factors: None,
        })
    }

    /// The Cartesian product of two 2-D sets, detected per polarization.
    pub fn product(name: impl Into<String>, x: Vec<Complex64>, y: Vec<Complex64>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidCount {
                count: 0,
                reason: "empty factor set".into(),
            });
        }
        let points: Vec<Symbol4D> = x
            .iter()
            .flat_map(|&cx| y.iter().map(move |&cy| Symbol4D::new(cx, cy)))
            .collect();
        check_distinct(&points)?;
        let bits = (points.len() as f64).log2();
        Ok(Constellation {
            name: name.into(),
            points,
            bits_per_symbol: bits,
            factors: Some(ProductFactors { x, y }),
        })
    }

    /// Builds a constellation with an explicit detection mode. `PerPolarization` requires the
    /// points to be an exact Cartesian product in row-major order.
    pub fn with_mode(
        name: impl Into<String>,
        points: Vec<Symbol4D>,
        mode: DetectionMode,
    ) -> Result<Self> {
        match mode {
            DetectionMode::Joint4D => Constellation::joint(name, points),
            DetectionMode::PerPolarization => {
                let factors = infer_product(&points).ok_or(Error::NotProduct)?;
                check_distinct(&points)?;
                let bits = (points.len() as f64).log2();
                Ok(Constellation {
                    name: name.into(),
                    points,
                    bits_per_symbol: bits,
                    factors: Some(factors),
                })
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn points(&self) -> &[Symbol4D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> f64 {
        self.bits_per_symbol
    }

    pub fn detection_mode(&self) -> DetectionMode {
        if self.factors.is_some() {
            DetectionMode::PerPolarization
        } else {
            DetectionMode::Joint4D
        }
    }

    pub fn factors(&self) -> Option<&ProductFactors> {
        self.factors.as_ref()
    }

    pub fn avg_energy(&self) -> f64 {
        self.points.iter().map(Symbol4D::energy).sum::<f64>() / self.points.len() as f64
    }

    /// Scales every point by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            *p = p.scale(k);
        }
        if let Some(f) = &mut out.factors {
            f.x.iter_mut().for_each(|v| *v *= k);
            f.y.iter_mut().for_each(|v| *v *= k);
        }
        out
    }

    /// Scales to unit average energy.
    pub fn normalize(&mut self) {
        let e = self.avg_energy();
        if e > 0.0 {
            *self = self.scaled(1.0 / e.sqrt());
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// Applies a real orthogonal 4x4 map to every point. The product structure is lost unless
    /// the map is block-diagonal, so the result is always detected jointly.
    pub fn rotated(&self, rot: &Rotation4) -> Self {
        Constellation {
            name: self.name.clone(),
            points: self.points.iter().map(|p| rot.apply(p)).collect(),
            bits_per_symbol: self.bits_per_symbol,
            factors: None,
        }
    }

    /// Minimum pairwise 4-D Euclidean distance (exhaustive). Needs at least two points.
    pub fn min_distance(&self) -> f64 {
        min_distance(self)
    }
}

/// Exact minimum 4-D Euclidean distance over all pairs.
pub fn min_distance(c: &Constellation) -> f64 {
    let pts = c.points();
    assert!(pts.len() >= 2, "min_distance needs at least two points");
    let mut best = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.min(a.dist_sqr(b));
        }
    }
    best.sqrt()
}

/// Sorted pairwise distances with multiplicities, grouping values closer than `tol`.
pub fn distance_spectrum(c: &Constellation, tol: f64) -> Vec<(f64, usize)> {
    let pts = c.points();
    let mut d: Vec<f64> = Vec::with_capacity(pts.len() * pts.len() / 2);
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d.push(a.dist_sqr(b).sqrt());
        }
    }
    d.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for v in d {
        match out.last_mut() {
            Some((last, n)) if (v - *last).abs() <= tol => *n += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

fn check_distinct(points: &[Symbol4D]) -> Result<()> {
    let e = points.iter().map(Symbol4D::energy).sum::<f64>() / points.len() as f64;
    let scale = if e > 0.0 { 1.0 / e } else { 1.0 };
    let eps2 = DISTINCT_EPS * DISTINCT_EPS;
    for (i, a) in points.iter().enumerate() {
        for (j, b) in points.iter().enumerate().skip(i + 1) {
            if a.dist_sqr(b) * scale <= eps2 {
                return Err(Error::DuplicatePoints(i, j));
            }
        }
    }
    Ok(())
}

/// Recovers row-major factor sets, or `None` if `points` is not an exact product.
fn infer_product(points: &[Symbol4D]) -> Option<ProductFactors> {
    let mut xs: Vec<Complex64> = Vec::new();
    for p in points {
        if !xs.contains(&p.x) {
            xs.push(p.x);
        }
    }
    if !points.len().is_multiple_of(xs.len()) {
        return None;
    }
    let ny = points.len() / xs.len();
    let ys: Vec<Complex64> = points[..ny].iter().map(|p| p.y).collect();
    for (i, &cx) in xs.iter().enumerate() {
        for (j, &cy) in ys.iter().enumerate() {
            let p = points[i * ny + j];
            if p.x != cx || p.y != cy {
                return None;
            }
        }
    }
    Some(ProductFactors { x: xs, y: ys })
}

/// A real orthogonal map of 4-D signal space, acting on `[xI, xQ, yI, yQ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation4(pub [[f64; 4]; 4]);

impl Rotation4 {
    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Rotation4(m)
    }

    /// Givens rotation by `angle` in the plane of axes `a` and `b`.
    pub fn givens(a: usize, b: usize, angle: f64) -> Self {
        let mut r = Rotation4::identity();
        let (s, c) = angle.sin_cos();
        r.0[a][a] = c;
        r.0[a][b] = -s;
        r.0[b][a] = s;
        r.0[b][b] = c;
        r
    }

    /// Random orthogonal map: product of Givens rotations over all six planes.
    pub fn from_angles(angles: [f64; 6]) -> Self {
        let planes = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        planes
            .iter()
            .zip(angles)
            .fold(Rotation4::identity(), |acc, (&(a, b), t)| {
                acc.compose(&Rotation4::givens(a, b, t))
            })
    }

    /// `self * other`.
    pub fn compose(&self, other: &Rotation4) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Rotation4(m)
    }

    pub fn apply_coords(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply(&self, s: &Symbol4D) -> Symbol4D {
        Symbol4D::from_coords(self.apply_coords(s.coords()))
    }
}

/// Distinct symbol-elements on one polarization with the number of 4-D points mapping to each.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstituentSet {
    pub elements: Vec<(Complex64, usize)>,
}

impl ConstituentSet {
    pub fn total(&self) -> usize {
        self.elements.iter().map(|e| e.1).sum()
    }
}

/// Projects the constellation onto both polarizations (the constituent 2-D constellations),
/// optionally after rotating it. Elements closer than `1e-9` (relative to the unit-energy
/// scale) are merged. Elements are listed in order of first appearance.
pub fn project_constituents(
    c: &Constellation,
    rotation: Option<&Rotation4>,
) -> (ConstituentSet, ConstituentSet) {
    let scale = c.avg_energy().sqrt().max(f64::MIN_POSITIVE);
    let tol = DISTINCT_EPS * scale;
    let mut xs: Vec<(Complex64, usize)> = Vec::new();
    let mut ys: Vec<(Complex64, usize)> = Vec::new();
    for p in c.points() {
        let p = match rotation {
            Some(r) => r.apply(p),
            None => *p,
        };
        tally(&mut xs, p.x, tol);
        tally(&mut ys, p.y, tol);
    }
    (ConstituentSet { elements: xs }, ConstituentSet { elements: ys })
}

fn tally(set: &mut Vec<(Complex64, usize)>, v: Complex64, tol: f64) {
    match set.iter_mut().find(|(e, _)| (*e - v).norm() <= tol) {
        Some((_, n)) => *n += 1,
        None => set.push((v, 1)),
    }
}
