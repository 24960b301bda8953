use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::constellation::{
    generate_biorthogonal, generate_classic_dual, generate_d4_lam, generate_hex_cylinder_psk,
    generate_sphere_4dpsk, io::read_constellation, ClassicKind, Constellation, LatticeCarveSpec,
    PackingParams,
};
use crate::error::{Error, Result};
use crate::sync::PolMode;

/// How to build one constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum ConstellationSpec {
    D4Lam {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<[f64; 4]>,
    },
    Sphere {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        restarts: Option<usize>,
    },
    HexCylinder {
        count: usize,
        #[serde(default = "one")]
        amp_x: f64,
        #[serde(default = "one")]
        amp_y: f64,
    },
    Biorthogonal {
        #[serde(default = "yes")]
        rotated: bool,
    },
    /// Bi-orthogonal stream alternating between the two dual-QPSK halves; PAPR tables only.
    BiorthogonalAlt,
    Classic {
        kind: String,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

pub(crate) const ALT_LABEL: &str = "bi-orthogonal alt.";

impl ConstellationSpec {
    pub fn build(&self) -> Result<Constellation> {
        match self {
            ConstellationSpec::D4Lam { count, offset } => {
                let mut spec = LatticeCarveSpec::new(*count);
                if let Some(o) = offset {
                    spec = spec.with_offset(*o);
                }
                generate_d4_lam(&spec)
            }
            ConstellationSpec::Sphere {
                count,
                seed,
                restarts,
            } => {
                let mut p = PackingParams::default();
                if let Some(s) = seed {
                    p.seed = *s;
                }
                if let Some(r) = restarts {
                    p.restarts = *r;
                }
                Ok(generate_sphere_4dpsk(*count, &p)?.constellation)
            }
            ConstellationSpec::HexCylinder {
                count,
                amp_x,
                amp_y,
            } => generate_hex_cylinder_psk(*count, *amp_x, *amp_y),
            ConstellationSpec::Biorthogonal { rotated } => Ok(generate_biorthogonal(*rotated)),
            ConstellationSpec::BiorthogonalAlt => Err(Error::Config {
                field: "constellations".into(),
                msg: "`biorthogonal_alt` is a symbol stream, only valid in papr_table".into(),
            }),
            ConstellationSpec::Classic { kind } => {
                let k: ClassicKind = kind.parse().map_err(|e: Error| Error::Config {
                    field: "constellations.kind".into(),
                    msg: e.to_string(),
                })?;
                Ok(generate_classic_dual(k))
            }
            ConstellationSpec::File { path } => read_constellation(path),
        }
    }

    pub fn classic(kind: ClassicKind) -> Self {
        ConstellationSpec::Classic {
            kind: kind.label().to_string(),
        }
    }

    /// Maps names such as `88-LAM`, `64-4D-PSK`, `hex-cyl-64-PSK`, `bi-orthogonal[-axes]` or
    /// `dual-8-PSK` to a generator. Case, spaces and underscores are ignored.
    pub fn from_name(name: &str) -> Option<Self> {
        let n = name.trim().to_ascii_lowercase().replace([' ', '_'], "-");
        let count = |s: &str| s.parse::<usize>().ok();
        if let Some(m) = n.strip_suffix("-lam").and_then(count) {
            return Some(ConstellationSpec::D4Lam {
                count: m,
                offset: None,
            });
        }
        if let Some(m) = n.strip_suffix("-4d-psk").and_then(count) {
            return Some(ConstellationSpec::Sphere {
                count: m,
                seed: None,
                restarts: None,
            });
        }
        if let Some(m) = n
            .strip_prefix("hex-cyl-")
            .and_then(|s| s.strip_suffix("-psk"))
            .and_then(count)
        {
            return Some(ConstellationSpec::HexCylinder {
                count: m,
                amp_x: 1.0,
                amp_y: 1.0,
            });
        }
        match n.as_str() {
            "bi-orthogonal" | "biorthogonal" => {
                return Some(ConstellationSpec::Biorthogonal { rotated: true })
            }
            "bi-orthogonal-axes" | "biorthogonal-axes" => {
                return Some(ConstellationSpec::Biorthogonal { rotated: false })
            }
            _ => {}
        }
        let kind = n.strip_prefix("dual-").unwrap_or(&n);
        kind.parse::<ClassicKind>().ok().map(ConstellationSpec::classic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SerSweep,
    GainAtThreshold,
    PaprTable,
    JitterSweep,
    ConstellationExport,
}

/// A gain comparison: `gain_db` is positive when `a` needs less Eb/N0 than `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSettings {
    pub min_errors: u64,
    pub max_symbols: u64,
    /// Grid spacing inside the bracket around the target SER.
    pub refine_step_db: f64,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        MonteCarloSettings {
            min_errors: 200,
            max_symbols: 200_000_000,
            refine_step_db: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaprSettings {
    pub n_symbols: usize,
    pub sps: usize,
    pub span: usize,
    pub rolloff: f64,
}

impl Default for PaprSettings {
    fn default() -> Self {
        PaprSettings {
            n_symbols: 200_000,
            sps: 8,
            span: 32,
            rolloff: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JitterSettings {
    pub esn0_db: Vec<f64>,
    pub modes: Vec<String>,
    pub prefilter: Vec<bool>,
    pub bn_t: f64,
    pub rolloff: f64,
    pub sps: usize,
    pub span: usize,
    pub measure_symbols: usize,
    /// Defaults to `20 / bn_t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settle_symbols: Option<usize>,
    /// MCRB pulse parameter; defaults to the raised-cosine value for `rolloff`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
}

impl Default for JitterSettings {
    fn default() -> Self {
        JitterSettings {
            esn0_db: Vec::new(),
            modes: vec!["single".into(), "dual".into()],
            prefilter: vec![false],
            bn_t: 5e-4,
            rolloff: 0.2,
            sps: 4,
            span: 16,
            measure_symbols: 1_000_000,
            settle_symbols: None,
            xi: None,
        }
    }
}

impl JitterSettings {
    pub(crate) fn modes(&self) -> Result<Vec<PolMode>> {
        self.modes
            .iter()
            .map(|m| {
                m.parse().map_err(|e: Error| Error::Config {
                    field: "jitter.modes".into(),
                    msg: e.to_string(),
                })
            })
            .collect()
    }
}

/// One experiment, usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default = "default_target")]
    pub target_ser: f64,
    #[serde(default)]
    pub esn0_grid_db: Vec<f64>,
    #[serde(default)]
    pub constellations: Vec<ConstellationSpec>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
    #[serde(default)]
    pub monte_carlo: MonteCarloSettings,
    #[serde(default)]
    pub papr: PaprSettings,
    #[serde(default)]
    pub jitter: JitterSettings,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_target() -> f64 {
    1e-4
}

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.into(),
    }
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            name: name.into(),
            experiment,
            seed: 0,
            output_dir: default_out(),
            target_ser: default_target(),
            esn0_grid_db: Vec::new(),
            constellations: Vec::new(),
            comparisons: Vec::new(),
            monte_carlo: MonteCarloSettings::default(),
            papr: PaprSettings::default(),
            jitter: JitterSettings::default(),
        }
    }

    /// Parses TOML; syntax and type errors carry the offending line.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                line,
                msg: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(cfg_err("name", "use letters, digits, `-` and `_` only"));
        }
        if !(self.target_ser > 0.0 && self.target_ser < 0.5) {
            return Err(cfg_err("target_ser", "must lie in (0, 0.5)"));
        }
        let needs_constellations = self.experiment != ExperimentKind::JitterSweep;
        if needs_constellations && self.constellations.is_empty() {
            return Err(cfg_err("constellations", "list is empty"));
        }
        match self.experiment {
            ExperimentKind::SerSweep | ExperimentKind::GainAtThreshold => {
                if self.esn0_grid_db.is_empty() {
                    return Err(cfg_err("esn0_grid_db", "grid is empty"));
                }
                if self.esn0_grid_db.iter().any(|v| !v.is_finite()) {
                    return Err(cfg_err("esn0_grid_db", "grid values must be finite"));
                }
                if self.experiment == ExperimentKind::GainAtThreshold && self.comparisons.is_empty() {
                    return Err(cfg_err("comparisons", "no comparison pairs"));
                }
                let mc = &self.monte_carlo;
                if mc.min_errors == 0 || mc.max_symbols == 0 {
                    return Err(cfg_err("monte_carlo", "min_errors and max_symbols must be positive"));
                }
                if mc.refine_step_db.is_nan() || mc.refine_step_db <= 0.0 {
                    return Err(cfg_err("monte_carlo.refine_step_db", "must be positive"));
                }
                if self
                    .constellations
                    .iter()
                    .any(|c| matches!(c, ConstellationSpec::BiorthogonalAlt))
                {
                    return Err(cfg_err(
                        "constellations",
                        "`biorthogonal_alt` is only valid in papr_table",
                    ));
                }
            }
            ExperimentKind::PaprTable => {
                let p = &self.papr;
                if p.n_symbols <= p.span {
                    return Err(cfg_err("papr.n_symbols", "must exceed the pulse span"));
                }
                crate::waveform::PulseShape::rrc(p.rolloff, p.span, p.sps)
                    .validate()
                    .map_err(|e| cfg_err("papr", e.to_string()))?;
            }
            ExperimentKind::JitterSweep => {
                let j = &self.jitter;
                if j.esn0_db.is_empty() {
                    return Err(cfg_err("jitter.esn0_db", "grid is empty"));
                }
                if j.modes.is_empty() || j.prefilter.is_empty() {
                    return Err(cfg_err("jitter", "modes and prefilter lists must be non-empty"));
                }
                j.modes()?;
                if let Some(xi) = j.xi {
                    if xi.is_nan() || xi <= 0.0 {
                        return Err(cfg_err("jitter.xi", "must be positive"));
                    }
                }
            }
            ExperimentKind::ConstellationExport => {}
        }
        Ok(())
    }
}
