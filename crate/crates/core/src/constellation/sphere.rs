//! Constant-energy 4-D constellations: points spread over the unit 3-sphere by repulsion.
//!
//! The optimizer minimizes an inverse-power potential `sum (r0 / r_ij)^s` over an increasing
//! schedule of exponents; large `s` approaches the max-min-distance problem. Steps are
//! accepted only if they lower the potential without shrinking the minimum distance, and the
//! step length is halved on rejection.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Constellation, Symbol4D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PackingParams {
    pub seed: u64,
    /// Independent random starts; the best final minimum distance wins.
    pub restarts: usize,
    pub exponents: Vec<f64>,
    pub max_iters_per_stage: usize,
    /// A stage ends once the minimum distance improves by less than this (relative) over
    /// `stall_window` accepted iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
}

impl Default for PackingParams {
    fn default() -> Self {
        PackingParams {
            seed: 0x005E_ED4D,
            restarts: 16,
            exponents: vec![2.0, 6.0, 12.0, 24.0, 48.0, 96.0, 192.0, 384.0],
            max_iters_per_stage: 4000,
            stall_tol: 1e-9,
            stall_window: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpherePacking {
    pub constellation: Constellation,
    pub min_distance: f64,
    /// Minimum distance after every accepted step of the winning start.
    pub history: Vec<f64>,
    /// False when a stage hit its iteration cap while still improving.
    pub converged: bool,
}

type P4 = [f64; 4];

fn normalize(v: &mut P4) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn d2(a: &P4, b: &P4) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn min_d2(pts: &[P4]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.min(d2(&pts[i], &pts[j]));
        }
    }
    m
}

fn energy(pts: &[P4], r0sq: f64, half_s: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            e += (r0sq / d2(&pts[i], &pts[j])).powf(half_s);
        }
    }
    e
}

/// Tangential repulsion forces, scaled so the largest has unit length.
fn forces(pts: &[P4], r0sq: f64, half_s: f64) -> Vec<P4> {
    let n = pts.len();
    let mut f = vec![[0.0; 4]; n];
    for i in 0..n {
        for j in i + 1..n {
            let r2 = d2(&pts[i], &pts[j]);
            let w = (r0sq / r2).powf(half_s) / r2;
            for k in 0..4 {
                let g = w * (pts[i][k] - pts[j][k]);
                f[i][k] += g;
                f[j][k] -= g;
            }
        }
    }
    let mut fmax: f64 = 0.0;
    for (fi, p) in f.iter_mut().zip(pts) {
        let radial: f64 = fi.iter().zip(p).map(|(a, b)| a * b).sum();
        for k in 0..4 {
            fi[k] -= radial * p[k];
        }
        fmax = fmax.max(fi.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    if fmax > 0.0 {
        f.iter_mut().for_each(|fi| fi.iter_mut().for_each(|x| *x /= fmax));
    }
    f
}

struct Run {
    pts: Vec<P4>,
    history: Vec<f64>,
    converged: bool,
}

fn optimize(count: usize, params: &PackingParams, start: u64) -> Run {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(start);
    let mut pts: Vec<P4> = (0..count)
        .map(|_| {
            let mut v: P4 = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            normalize(&mut v);
            v
        })
        .collect();
    let mut cur_min = min_d2(&pts);
    let mut history = vec![cur_min.sqrt()];
    let mut converged = true;

    for &s in &params.exponents {
        let half_s = s / 2.0;
        let r0sq = cur_min;
        let mut e = energy(&pts, r0sq, half_s);
        let mut step = 0.25 * cur_min.sqrt();
        let mut window_start = cur_min;
        let mut accepted = 0usize;
        let mut stage_done = false;
        for _ in 0..params.max_iters_per_stage {
            let f = forces(&pts, r0sq, half_s);
            let trial: Vec<P4> = pts
                .iter()
                .zip(&f)
                .map(|(p, fi)| {
                    let mut q: P4 = std::array::from_fn(|k| p[k] + step * fi[k]);
                    normalize(&mut q);
                    q
                })
                .collect();
            let e_new = energy(&trial, r0sq, half_s);
            let m_new = min_d2(&trial);
            if e_new < e && m_new >= cur_min {
                pts = trial;
                e = e_new;
                cur_min = m_new;
                history.push(cur_min.sqrt());
                step = (step * 1.25).min(0.5);
                accepted += 1;
                if accepted.is_multiple_of(params.stall_window) {
                    if (cur_min - window_start) <= params.stall_tol * window_start {
                        stage_done = true;
                        break;
                    }
                    window_start = cur_min;
                }
            } else {
                step *= 0.5;
                if step < 1e-13 {
                    stage_done = true;
                    break;
                }
            }
        }
        if !stage_done {
            converged = false;
        }
    }
    Run {
        pts,
        history,
        converged,
    }
}

/// `count` equal-energy points on the unit 3-sphere with (locally) maximal minimum distance.
/// Deterministic for a fixed `params.seed`. The result is reported even when a stage did not
/// converge; check [`SpherePacking::converged`].
pub fn generate_sphere_4dpsk(count: usize, params: &PackingParams) -> Result<SpherePacking> {
    if count < 2 {
        return Err(Error::InvalidCount {
            count,
            reason: "sphere packing needs at least two points".into(),
        });
    }
    if params.restarts == 0 || params.exponents.is_empty() {
        return Err(Error::invalid("packing needs at least one start and one stage"));
    }
    let mut best = optimize(count, params, 0);
    for k in 1..params.restarts as u64 {
        let run = optimize(count, params, k);
        if run.history.last() > best.history.last() {
            best = run;
        }
    }
    let points = best.pts.iter().map(|&c| Symbol4D::from_coords(c)).collect();
    let constellation = Constellation::joint(format!("{count}-4D-PSK"), points)?;
    Ok(SpherePacking {
        min_distance: constellation.min_distance(),
        constellation,
        history: best.history,
        converged: best.converged,
    })
}

/// Loads externally computed sphere-packing coordinates from an interchange file. All points
/// must share one energy (within `1e-9` relative).
pub fn load_sphere_packing(path: impl AsRef<Path>) -> Result<Constellation> {
    let c = super::io::read_constellation(path)?;
    let e0 = c.points()[0].energy();
    if let Some(i) = c
        .points()
        .iter()
        .position(|p| (p.energy() - e0).abs() > 1e-9 * e0)
    {
        return Err(Error::invalid(format!(
            "point {i} is not on the sphere of the first point"
        )));
    }
    Ok(c.normalized())
}
