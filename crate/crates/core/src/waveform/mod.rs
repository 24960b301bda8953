//! Sample-level dual-polarization synthesis and peak-to-average power measurement.

mod pulse;

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::RngStream;
use crate::constellation::{qpsk_parity_sets, Constellation, Symbol4D};
use crate::error::{Error, Result};

pub use pulse::{rc_value, rrc_value, PulseKind, PulseShape};

/// Baseband samples of both polarizations.
#[derive(Debug, Clone, PartialEq)]
pub struct DualWaveform {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sps: usize,
}

impl DualWaveform {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Calls `f(k, x_k, y_k)` for output samples `k` in `range` of the pulse-shaped stream. Sample
/// `k * sps` is aligned with symbol `k` (group delay removed).
fn for_each_sample<F: FnMut(usize, Complex64, Complex64)>(
    symbols: &[Symbol4D],
    taps: &[f64],
    pulse: &PulseShape,
    range: std::ops::Range<usize>,
    mut f: F,
) {
    let sps = pulse.sps as i64;
    let d = pulse.delay() as i64;
    let l = taps.len() as i64;
    let n = symbols.len() as i64;
    for k in range {
        let base = k as i64 + d;
        // tap index t = base - i*sps must lie in [0, l)
        let i_hi = (base / sps).min(n - 1);
        let i_lo = (base - l + 1 + sps - 1).div_euclid(sps).max(0);
        let (mut sx, mut sy) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut i = i_lo;
        while i <= i_hi {
            let g = taps[(base - i * sps) as usize];
            let s = &symbols[i as usize];
            sx += s.x * g;
            sy += s.y * g;
            i += 1;
        }
        f(k, sx, sy);
    }
}

/// Pulse-shapes a sequence of 4-D symbols; output length is `symbols.len() * sps`.
pub fn shape_symbols(symbols: &[Symbol4D], pulse: &PulseShape) -> Result<DualWaveform> {
    pulse.validate()?;
    let taps = pulse.taps();
    let n = symbols.len() * pulse.sps;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for_each_sample(symbols, &taps, pulse, 0..n, |_, a, b| {
        x.push(a);
        y.push(b);
    });
    Ok(DualWaveform {
        x,
        y,
        sps: pulse.sps,
    })
}

/// Pulse-shapes the points of `c` selected by `symbols`.
pub fn shape_waveform(
    c: &Constellation,
    symbols: &[usize],
    pulse: &PulseShape,
) -> Result<DualWaveform> {
    let pts = c.points();
    let seq = symbols
        .iter()
        .map(|&k| {
            pts.get(k)
                .copied()
                .ok_or_else(|| Error::invalid(format!("symbol index {k} out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    shape_symbols(&seq, pulse)
}

/// Running peak and mean power of both carriers and their sum. Accumulators over disjoint
/// chunks combine with [`PaprAccumulator::merge`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PaprAccumulator {
    pub n: u64,
    pub peak_combined: f64,
    pub sum_combined: f64,
    pub peak: [f64; 2],
    pub sum: [f64; 2],
}

impl PaprAccumulator {
    pub fn push(&mut self, x: Complex64, y: Complex64) {
        self.push_weighted(x, y, 1);
    }

    fn push_weighted(&mut self, x: Complex64, y: Complex64, w: u64) {
        let px = x.norm_sqr();
        let py = y.norm_sqr();
        self.n += w;
        self.peak_combined = self.peak_combined.max(px + py);
        self.sum_combined += w as f64 * (px + py);
        self.peak[0] = self.peak[0].max(px);
        self.peak[1] = self.peak[1].max(py);
        self.sum[0] += w as f64 * px;
        self.sum[1] += w as f64 * py;
    }

    pub fn merge(&self, other: &PaprAccumulator) -> Self {
        PaprAccumulator {
            n: self.n + other.n,
            peak_combined: self.peak_combined.max(other.peak_combined),
            sum_combined: self.sum_combined + other.sum_combined,
            peak: [
                self.peak[0].max(other.peak[0]),
                self.peak[1].max(other.peak[1]),
            ],
            sum: [self.sum[0] + other.sum[0], self.sum[1] + other.sum[1]],
        }
    }

    /// `(combined, single)` ratios; `single` is the worse of the two carriers.
    pub fn ratios(&self) -> (f64, f64) {
        let n = self.n as f64;
        let combined = self.peak_combined / (self.sum_combined / n);
        let single = (0..2)
            .map(|p| self.peak[p] / (self.sum[p] / n))
            .fold(f64::NAN, f64::max);
        (combined, single)
    }
}

/// Linear peak-to-average power ratios of one modulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprReport {
    pub combined_symbol: f64,
    pub single_symbol: f64,
    pub combined_shaped: f64,
    pub single_shaped: f64,
}

/// Symbol-level `(combined, single)` PAPR with equiprobable points.
pub fn symbol_papr(c: &Constellation) -> (f64, f64) {
    let mut acc = PaprAccumulator::default();
    for p in c.points() {
        acc.push(p.x, p.y);
    }
    acc.ratios()
}

/// `(combined, single)` PAPR over every sample of `w`.
pub fn waveform_papr(w: &DualWaveform) -> (f64, f64) {
    let mut acc = PaprAccumulator::default();
    for (x, y) in w.x.iter().zip(&w.y) {
        acc.push(*x, *y);
    }
    acc.ratios()
}

/// Shaped `(combined, single)` PAPR of a symbol sequence, excluding the filter's start-up and
/// run-out transients (`span/2` symbols at each end). The waveform is never stored.
pub fn shaped_papr(symbols: &[Symbol4D], pulse: &PulseShape) -> Result<(f64, f64)> {
    pulse.validate()?;
    let edge = pulse.span / 2 * pulse.sps;
    let n = symbols.len() * pulse.sps;
    if n <= 2 * edge {
        return Err(Error::invalid("sequence shorter than the pulse span"));
    }
    let taps = pulse.taps();
    let mut acc = PaprAccumulator::default();
    for_each_sample(symbols, &taps, pulse, edge..n - edge, |_, x, y| acc.push(x, y));
    Ok(acc.ratios())
}

/// `n` i.i.d. uniform points of `c`.
pub fn random_symbols(c: &Constellation, n: usize, rng: &RngStream) -> Vec<Symbol4D> {
    let mut g = rng.rng();
    let pts = c.points();
    (0..n).map(|_| pts[g.random_range(0..pts.len())]).collect()
}

/// Full report for i.i.d. uniform symbols of `c`.
pub fn measure_papr(
    c: &Constellation,
    n_symbols: usize,
    pulse: &PulseShape,
    rng: &RngStream,
) -> Result<PaprReport> {
    if c.is_empty() || n_symbols == 0 {
        return Err(Error::invalid("PAPR of an empty input"));
    }
    let (combined_symbol, single_symbol) = symbol_papr(c);
    let (combined_shaped, single_shaped) = shaped_papr(&random_symbols(c, n_symbols, rng), pulse)?;
    Ok(PaprReport {
        combined_symbol,
        single_symbol,
        combined_shaped,
        single_shaped,
    })
}

/// A bi-orthogonal stream that switches between the two complementary dual-QPSK halves after
/// every symbol: even positions use `sets[0]`, odd positions `sets[1]`.
#[derive(Debug, Clone)]
pub struct AltSequence {
    pub indices: Vec<usize>,
    pub sets: [Constellation; 2],
}

impl AltSequence {
    pub fn symbols(&self) -> Vec<Symbol4D> {
        self.indices
            .iter()
            .enumerate()
            .map(|(p, &k)| self.sets[p % 2].points()[k])
            .collect()
    }
}

pub fn biorthogonal_alt_sequence(n_symbols: usize, rng: &RngStream) -> AltSequence {
    let (even, odd) = qpsk_parity_sets();
    let sets = [
        Constellation::joint("bi-orthogonal (even)", even).expect("distinct points"),
        Constellation::joint("bi-orthogonal (odd)", odd).expect("distinct points"),
    ];
    let mut g = rng.rng();
    let indices = (0..n_symbols).map(|_| g.random_range(0..8)).collect();
    AltSequence { indices, sets }
}

/// Report for the alternating bi-orthogonal stream. Both halves are constant-envelope, so the
/// symbol-level ratios come from their union.
pub fn measure_papr_alt(
    n_symbols: usize,
    pulse: &PulseShape,
    rng: &RngStream,
) -> Result<PaprReport> {
    let seq = biorthogonal_alt_sequence(n_symbols, rng);
    let mut acc = PaprAccumulator::default();
    for s in seq.sets.iter().flat_map(|c| c.points()) {
        acc.push(s.x, s.y);
    }
    let (combined_symbol, single_symbol) = acc.ratios();
    let (combined_shaped, single_shaped) = shaped_papr(&seq.symbols(), pulse)?;
    Ok(PaprReport {
        combined_symbol,
        single_symbol,
        combined_shaped,
        single_shaped,
    })
}

/// Writes `modulation, symbol_combined, symbol_single, shaped_combined, shaped_single` with
/// ratios rounded to two decimals.
pub fn write_papr_csv<W: Write>(rows: &[(String, PaprReport)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "modulation",
        "symbol_combined",
        "symbol_single",
        "shaped_combined",
        "shaped_single",
    ])?;
    for (name, r) in rows {
        w.write_record([
            name.clone(),
            format!("{:.2}", r.combined_symbol),
            format!("{:.2}", r.single_symbol),
            format!("{:.2}", r.combined_shaped),
            format!("{:.2}", r.single_shaped),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{generate_classic_dual, ClassicKind};

    #[test]
    fn rc_single_symbol_peak() {
        let c = generate_classic_dual(ClassicKind::Qam16);
        let p = PulseShape::rc(0.2, 16, 4);
        let w = shape_waveform(&c, &[5], &p).unwrap();
        assert_eq!(w.len(), 4);
        assert!((w.x[0] - c.points()[5].x).norm() < 1e-15);
        assert!((w.y[0] - c.points()[5].y).norm() < 1e-15);
    }

    #[test]
    fn out_of_range_index() {
        let c = generate_classic_dual(ClassicKind::Qpsk);
        assert!(shape_waveform(&c, &[16], &PulseShape::rrc(0.2, 8, 4)).is_err());
    }

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let c = generate_classic_dual(ClassicKind::Qam16);
        let pts = c.points();
        let mut all = PaprAccumulator::default();
        let (mut a, mut b) = (PaprAccumulator::default(), PaprAccumulator::default());
        for (i, p) in pts.iter().enumerate() {
            all.push(p.x, p.y);
            if i < 7 {
                a.push(p.x, p.y)
            } else {
                b.push(p.x, p.y)
            }
        }
        let m = a.merge(&b);
        assert_eq!(m.n, all.n);
        assert_eq!(m.peak_combined, all.peak_combined);
        assert!((m.sum_combined - all.sum_combined).abs() < 1e-12);
    }

    #[test]
    fn constant_symbol_all_ones() {
        let c = generate_classic_dual(ClassicKind::Qpsk);
        let seq = vec![c.points()[3]; 1];
        let mut acc = PaprAccumulator::default();
        for s in &seq {
            acc.push(s.x, s.y);
        }
        assert_eq!(acc.ratios(), (1.0, 1.0));
    }

    #[test]
    fn alt_positions_use_both_sets() {
        let s = biorthogonal_alt_sequence(2, &RngStream::new(1, 0));
        let sy = s.symbols();
        assert!(s.sets[0].points().contains(&sy[0]));
        assert!(s.sets[1].points().contains(&sy[1]));
    }
}
