//! Declarative experiment runner reproducing the SER figures, the PAPR table and the jitter
//! figure as CSV and plot-data files.

mod config;
mod presets;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    Comparison, ConstellationSpec, ExperimentConfig, ExperimentKind, JitterSettings,
    MonteCarloSettings, PaprSettings,
};
pub use presets::{preset, PRESETS};

use crate::channel::{
    esn0_to_ebn0_db, simulate_ser, snr_at_ser, write_ser_csv, RngStream, SerEstimate, SerRow,
    StopRule,
};
use crate::constellation::io::write_constellation;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::sync::{jitter_curve, write_jitter_csv, xi_for_rolloff, JitterRow, TimingLoopConfig};
use crate::waveform::{measure_papr, measure_papr_alt, write_papr_csv, PaprReport, PulseShape};

/// Simulated SER points of one constellation, ascending in Es/N0.
#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub name: String,
    pub bits_per_symbol: f64,
    pub points: Vec<(f64, SerEstimate)>,
}

impl SerCurve {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|(x, e)| (*x, e.ser)).collect()
    }

    pub fn underresolved(&self) -> bool {
        self.points.iter().any(|(_, e)| e.underresolved)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainPair {
    pub constellation_a: String,
    pub constellation_b: String,
    pub esn0_a_db: f64,
    pub esn0_b_db: f64,
    pub ebn0_a_db: f64,
    pub ebn0_b_db: f64,
    /// `ebn0_b_db - ebn0_a_db`: how much less energy per bit `a` needs.
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainReport {
    pub pairs: Vec<GainPair>,
}

impl GainReport {
    pub fn get(&self, a: &str, b: &str) -> Option<&GainPair> {
        self.pairs
            .iter()
            .find(|p| p.constellation_a == a && p.constellation_b == b)
    }
}

/// Gains at `target_ser` for the requested pairs, read off each curve by log-linear
/// interpolation and compared per bit.
pub fn compare_gain(
    curves: &[SerCurve],
    pairs: &[Comparison],
    target_ser: f64,
) -> Result<GainReport> {
    let crossing = |name: &str| -> Result<(f64, f64)> {
        let c = curves
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Config {
                field: "comparisons".into(),
                msg: format!("no curve named `{name}`"),
            })?;
        let esn0 = snr_at_ser(&c.pairs(), target_ser).map_err(|e| match e {
            Error::NoBracket { target, .. } => Error::NoBracket {
                target,
                curve: Some(name.to_string()),
            },
            other => other,
        })?;
        Ok((esn0, esn0_to_ebn0_db(esn0, c.bits_per_symbol)))
    };
    let mut out = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (esn0_a_db, ebn0_a_db) = crossing(&p.a)?;
        let (esn0_b_db, ebn0_b_db) = crossing(&p.b)?;
        out.push(GainPair {
            constellation_a: p.a.clone(),
            constellation_b: p.b.clone(),
            esn0_a_db,
            esn0_b_db,
            ebn0_a_db,
            ebn0_b_db,
            gain_db: ebn0_b_db - ebn0_a_db,
        });
    }
    Ok(GainReport { pairs: out })
}

fn stream_key(curve: usize, esn0_db: f64) -> u64 {
    ((curve as u64) << 32) | ((esn0_db * 1000.0).round() as i32 as u32 as u64)
}

/// Sweeps `grid` upwards until the SER first drops below `target_ser`, then fills the
/// bracketing interval with points `refine_step_db` apart. Every point draws from its own
/// stream keyed by `(curve, Es/N0)`.
pub fn sweep_curve(
    c: &Constellation,
    curve: usize,
    grid: &[f64],
    target_ser: f64,
    mc: &MonteCarloSettings,
    seed: u64,
) -> SerCurve {
    let stop = StopRule::new(mc.max_symbols, mc.min_errors);
    let run = |x: f64| simulate_ser(c, x, &stop, &RngStream::new(seed, stream_key(curve, x)));
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    let mut points: Vec<(f64, SerEstimate)> = Vec::new();
    for x in g {
        let e = run(x);
        points.push((x, e));
        if e.ser < target_ser {
            break;
        }
    }
    let bracket = points
        .windows(2)
        .position(|w| w[0].1.ser > target_ser && w[1].1.ser <= target_ser);
    if let Some(i) = bracket {
        let (x0, x1) = (points[i].0, points[i + 1].0);
        let step = mc.refine_step_db;
        let mut extra = Vec::new();
        let mut x = x0 + step;
        while x < x1 - 1e-9 {
            extra.push((x, run(x)));
            x += step;
        }
        points.extend(extra);
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    SerCurve {
        name: c.name().to_string(),
        bits_per_symbol: c.bits_per_symbol(),
        points,
    }
}

/// Everything an experiment produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub name: String,
    pub files: Vec<PathBuf>,
    /// Some Monte-Carlo point stopped at `max_symbols` before reaching `min_errors`.
    pub underresolved: bool,
    pub curves: Vec<SerCurve>,
    pub gains: Option<GainReport>,
    pub papr: Vec<(String, PaprReport)>,
    pub jitter: Vec<JitterRow>,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}", self.name);
        for c in &self.curves {
            let trials: u64 = c.points.iter().map(|p| p.1.trials).sum();
            let _ = writeln!(
                s,
                "  {}: {} points, {} symbols{}",
                c.name,
                c.points.len(),
                trials,
                if c.underresolved() { " (underresolved)" } else { "" }
            );
        }
        if let Some(g) = &self.gains {
            for p in &g.pairs {
                let _ = writeln!(
                    s,
                    "  gain {} vs {}: {:.2} dB (Eb/N0 {:.2} / {:.2} dB)",
                    p.constellation_a, p.constellation_b, p.gain_db, p.ebn0_a_db, p.ebn0_b_db
                );
            }
        }
        for (name, r) in &self.papr {
            let _ = writeln!(
                s,
                "  {name}: symbol {:.2}/{:.2}, shaped {:.2}/{:.2}",
                r.combined_symbol, r.single_symbol, r.combined_shaped, r.single_shaped
            );
        }
        for r in &self.jitter {
            let _ = writeln!(
                s,
                "  {} dB {} prefilter={}: var {:.3e}, {:.2} x MCRB, {}",
                r.esn0_db, r.mode, r.prefilter, r.variance_norm, r.ratio_to_mcrb, r.lock_flag
            );
        }
        for w in &self.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        for f in &self.files {
            let _ = writeln!(s, "  wrote {}", f.display());
        }
        s
    }
}

fn build_all(specs: &[ConstellationSpec]) -> Result<Vec<Constellation>> {
    specs.par_iter().map(|s| s.build()).collect()
}

fn run_ser(cfg: &ExperimentConfig, out: &mut RunSummary) -> Result<()> {
    let cons = build_all(&cfg.constellations)?;
    for (i, c) in cons.iter().enumerate() {
        if cons[..i].iter().any(|o| o.name() == c.name()) {
            return Err(Error::Config {
                field: "constellations".into(),
                msg: format!("duplicate constellation `{}`", c.name()),
            });
        }
    }
    out.curves = cons
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            sweep_curve(c, i, &cfg.esn0_grid_db, cfg.target_ser, &cfg.monte_carlo, cfg.seed)
        })
        .collect();
    out.underresolved = out.curves.iter().any(SerCurve::underresolved);
    if !cfg.comparisons.is_empty() {
        match compare_gain(&out.curves, &cfg.comparisons, cfg.target_ser) {
            Ok(g) => out.gains = Some(g),
            // a curve cut short by max_symbols may not reach the target; keep the curves
            Err(e @ Error::NoBracket { .. }) if out.underresolved => {
                out.warnings.push(format!("gains skipped: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn run_papr(cfg: &ExperimentConfig, out: &mut RunSummary) -> Result<()> {
    let p = &cfg.papr;
    let pulse = PulseShape::rrc(p.rolloff, p.span, p.sps);
    out.papr = cfg
        .constellations
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let rng = RngStream::new(cfg.seed, i as u64);
            match spec {
                ConstellationSpec::BiorthogonalAlt => Ok((
                    config::ALT_LABEL.to_string(),
                    measure_papr_alt(p.n_symbols, &pulse, &rng)?,
                )),
                _ => {
                    let c = spec.build()?;
                    Ok((c.name().to_string(), measure_papr(&c, p.n_symbols, &pulse, &rng)?))
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(())
}

fn jitter_grid(cfg: &ExperimentConfig) -> Result<Vec<TimingLoopConfig>> {
    let j = &cfg.jitter;
    let modes = j.modes()?;
    let mut grid = Vec::new();
    for &prefilter in &j.prefilter {
        for &mode in &modes {
            for &esn0_db in &j.esn0_db {
                let mut t = TimingLoopConfig::new(j.bn_t, mode, esn0_db);
                t.prefilter = prefilter;
                t.rolloff = j.rolloff;
                t.sps = j.sps;
                t.span = j.span;
                t.measure_symbols = j.measure_symbols;
                if let Some(s) = j.settle_symbols {
                    t.settle_symbols = s;
                }
                t.validate().map_err(|e| Error::Config {
                    field: "jitter".into(),
                    msg: e.to_string(),
                })?;
                grid.push(t);
            }
        }
    }
    Ok(grid)
}

fn run_jitter(cfg: &ExperimentConfig, out: &mut RunSummary) -> Result<()> {
    let xi = cfg.jitter.xi.unwrap_or_else(|| xi_for_rolloff(cfg.jitter.rolloff));
    out.jitter = jitter_curve(&jitter_grid(cfg)?, xi, cfg.seed)?;
    Ok(())
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn ser_plot_data(curves: &[SerCurve]) -> String {
    let mut s = String::new();
    for (k, c) in curves.iter().enumerate() {
        if k > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {}\n# esn0_db ebn0_db ser ci95", c.name);
        for (x, e) in &c.points {
            let eb = esn0_to_ebn0_db(*x, c.bits_per_symbol);
            let _ = writeln!(s, "{x} {eb} {:e} {:e}", e.ser, e.ci95_halfwidth);
        }
    }
    s
}

fn jitter_plot_data(rows: &[JitterRow]) -> String {
    let mut s = String::new();
    let mut last: Option<(&str, bool)> = None;
    for r in rows {
        let key = (r.mode.as_str(), r.prefilter);
        if last != Some(key) {
            if last.is_some() {
                s.push_str("\n\n");
            }
            let _ = writeln!(
                s,
                "# mode={} prefilter={}\n# esn0_db variance_norm mcrb_norm",
                r.mode, r.prefilter
            );
            last = Some(key);
        }
        let _ = writeln!(s, "{} {:e} {:e}", r.esn0_db, r.variance_norm, r.mcrb_norm);
    }
    s
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn write(&mut self, file: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = self.dir.join(file);
        let mut h = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.written.push(path.clone());
        h.write_all(&buf).map_err(|e| Error::io(&path, e))
    }

    fn cleanup(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

fn write_outputs(cfg: &ExperimentConfig, sum: &RunSummary, o: &mut Outputs) -> Result<()> {
    let name = &cfg.name;
    match cfg.experiment {
        ExperimentKind::SerSweep | ExperimentKind::GainAtThreshold => {
            let rows: Vec<SerRow> = sum
                .curves
                .iter()
                .flat_map(|c| c.points.iter().map(|(x, e)| SerRow::new(&c.name, *x, e)))
                .collect();
            o.write(&format!("{name}_ser.csv"), |b| write_ser_csv(&rows, b))?;
            o.write(&format!("{name}_ser.dat"), |b| {
                b.extend_from_slice(ser_plot_data(&sum.curves).as_bytes());
                Ok(())
            })?;
            if let Some(g) = &sum.gains {
                o.write(&format!("{name}_gains.csv"), |b| {
                    let mut w = csv::Writer::from_writer(b);
                    for p in &g.pairs {
                        w.serialize(p)?;
                    }
                    w.flush().map_err(csv::Error::from)?;
                    Ok(())
                })?;
            }
        }
        ExperimentKind::PaprTable => {
            o.write(&format!("{name}_papr.csv"), |b| write_papr_csv(&sum.papr, b))?;
        }
        ExperimentKind::JitterSweep => {
            o.write(&format!("{name}_jitter.csv"), |b| write_jitter_csv(&sum.jitter, b))?;
            o.write(&format!("{name}_jitter.dat"), |b| {
                b.extend_from_slice(jitter_plot_data(&sum.jitter).as_bytes());
                Ok(())
            })?;
        }
        ExperimentKind::ConstellationExport => {
            for spec in &cfg.constellations {
                let c = spec.build()?;
                let path = o.dir.join(format!("{}.txt", file_stem(c.name())));
                o.written.push(path.clone());
                write_constellation(&c, &path)?;
            }
        }
    }
    Ok(())
}

/// Validates `cfg`, runs it and writes its files into `cfg.output_dir`. Nothing is written
/// when validation or computation fails; files already written are removed if a later write
/// fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let mut sum = RunSummary {
        name: cfg.name.clone(),
        ..RunSummary::default()
    };
    match cfg.experiment {
        ExperimentKind::SerSweep | ExperimentKind::GainAtThreshold => run_ser(cfg, &mut sum)?,
        ExperimentKind::PaprTable => run_papr(cfg, &mut sum)?,
        ExperimentKind::JitterSweep => run_jitter(cfg, &mut sum)?,
        ExperimentKind::ConstellationExport => {
            build_all(&cfg.constellations)?;
        }
    }
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let mut o = Outputs {
        dir: &cfg.output_dir,
        written: Vec::new(),
    };
    if let Err(e) = write_outputs(cfg, &sum, &mut o) {
        o.cleanup();
        return Err(e);
    }
    sum.files = o.written;
    Ok(sum)
}
