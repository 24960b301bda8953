//! Monte-Carlo symbol error rate and the pairwise union bound.
//!
//! Simulation runs in fixed-size blocks; block `b` always draws from
//! [`RngStream::block`]`(b)`. The stopping rule is evaluated on the shortest prefix of blocks
//! that reaches `min_errors`, so results do not depend on how blocks were spread over
//! workers.

use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use super::awgn::{noise_sigma, transmit_with};
use super::{q_function, Detector, RngStream};
use crate::constellation::Constellation;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub max_symbols: u64,
    pub min_errors: u64,
    pub block_size: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_symbols: 200_000_000,
            min_errors: 200,
            block_size: 1 << 15,
        }
    }
}

impl StopRule {
    pub fn new(max_symbols: u64, min_errors: u64) -> Self {
        StopRule {
            max_symbols,
            min_errors,
            ..StopRule::default()
        }
    }

    fn block_len(&self, b: u64) -> u64 {
        let start = b * self.block_size;
        self.block_size.min(self.max_symbols.saturating_sub(start))
    }

    fn n_blocks(&self) -> u64 {
        self.max_symbols.div_ceil(self.block_size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ser: f64,
    /// Normal-approximation 95% half-width `1.96 sqrt(p(1-p)/n)`.
    pub ci95_halfwidth: f64,
    /// Set when the symbol budget ran out before `min_errors` errors.
    pub underresolved: bool,
}

impl SerEstimate {
    pub fn from_counts(errors: u64, trials: u64, min_errors: u64) -> Self {
        let ser = if trials > 0 {
            errors as f64 / trials as f64
        } else {
            0.0
        };
        let ci = if trials > 0 {
            1.96 * (ser * (1.0 - ser) / trials as f64).sqrt()
        } else {
            f64::INFINITY
        };
        SerEstimate {
            errors,
            trials,
            ser,
            ci95_halfwidth: ci,
            underresolved: errors < min_errors,
        }
    }

    /// Pools two disjoint runs.
    pub fn merge(&self, other: &SerEstimate, min_errors: u64) -> Self {
        SerEstimate::from_counts(self.errors + other.errors, self.trials + other.trials, min_errors)
    }
}

fn run_block(
    c: &Constellation,
    det: &Detector,
    sigma: f64,
    rng: &RngStream,
    b: u64,
    len: u64,
) -> (u64, u64) {
    let mut g = rng.block(b);
    let mut errors = 0u64;
    transmit_with(&mut g, c, sigma, len as usize, |k, r| {
        if det.detect(&r) != k {
            errors += 1;
        }
    });
    (errors, len)
}

/// `(errors, trials)` summed over the given blocks of `rng`.
pub fn simulate_ser_blocks(
    c: &Constellation,
    esn0_db: f64,
    rng: &RngStream,
    blocks: Range<u64>,
    stop: &StopRule,
) -> (u64, u64) {
    let det = Detector::new(c);
    let sigma = noise_sigma(c.avg_energy(), esn0_db);
    blocks
        .map(|b| run_block(c, &det, sigma, rng, b, stop.block_len(b)))
        .fold((0, 0), |a, x| (a.0 + x.0, a.1 + x.1))
}

/// Simulates until `stop.min_errors` errors or `stop.max_symbols` symbols. Blocks are
/// evaluated on the current rayon pool.
pub fn simulate_ser(
    c: &Constellation,
    esn0_db: f64,
    stop: &StopRule,
    rng: &RngStream,
) -> SerEstimate {
    let det = Detector::new(c);
    let sigma = noise_sigma(c.avg_energy(), esn0_db);
    let total_blocks = stop.n_blocks();
    let batch = rayon::current_num_threads().max(1) as u64;
    let (mut errors, mut trials) = (0u64, 0u64);
    let mut next = 0u64;
    while next < total_blocks {
        let end = (next + batch).min(total_blocks);
        let results: Vec<(u64, u64)> = (next..end)
            .into_par_iter()
            .map(|b| run_block(c, &det, sigma, rng, b, stop.block_len(b)))
            .collect();
        for (e, n) in results {
            errors += e;
            trials += n;
            if errors >= stop.min_errors {
                return SerEstimate::from_counts(errors, trials, stop.min_errors);
            }
        }
        next = end;
    }
    SerEstimate::from_counts(errors, trials, stop.min_errors)
}

/// `(1/M) sum_i sum_{j != i} Q(d_ij / (2 sigma))` with `sigma^2 = N0/2`.
pub fn union_bound(c: &Constellation, esn0_db: f64) -> f64 {
    let sigma = noise_sigma(c.avg_energy(), esn0_db);
    if sigma == 0.0 {
        return 0.0;
    }
    let pts = c.points();
    let mut sum = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            sum += q_function(a.dist_sqr(b).sqrt() / (2.0 * sigma));
        }
    }
    2.0 * sum / pts.len() as f64
}

/// One row of the SER curve file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerRow {
    pub constellation: String,
    pub esn0_db: f64,
    pub ser: f64,
    pub errors: u64,
    pub trials: u64,
    pub ci95: f64,
}

impl SerRow {
    pub fn new(constellation: impl Into<String>, esn0_db: f64, est: &SerEstimate) -> Self {
        SerRow {
            constellation: constellation.into(),
            esn0_db,
            ser: est.ser,
            errors: est.errors,
            trials: est.trials,
            ci95: est.ci95_halfwidth,
        }
    }
}

/// Writes `constellation, esn0_db, ser, errors, trials, ci95`. Rows are grouped by
/// constellation in order of first appearance, ascending in Es/N0 within a group.
pub fn write_ser_csv<W: Write>(rows: &[SerRow], out: W) -> Result<()> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.constellation.as_str()) {
            order.push(&r.constellation);
        }
    }
    let mut sorted: Vec<&SerRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        let ia = order.iter().position(|n| *n == a.constellation).unwrap();
        let ib = order.iter().position(|n| *n == b.constellation).unwrap();
        ia.cmp(&ib).then(a.esn0_db.total_cmp(&b.esn0_db))
    });
    let mut w = csv::Writer::from_writer(out);
    for r in sorted {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
