use super::config::{
    Comparison, ConstellationSpec, ExperimentConfig, ExperimentKind, JitterSettings,
};
use crate::constellation::ClassicKind;

/// Preset names with a one-line description.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig-ser-6bit", "SER of 88-LAM, 64-4D-PSK, dual 8-PSK and dual hex 8-QAM; gains at 1e-4"),
    ("fig-ser-8bit", "SER of 256-LAM, dual 16-QAM and dual 16-APSK; gains at 1e-4"),
    ("fig-ser-cyl", "SER of hexagonal cylinder 64-PSK against dual 8-PSK (500 errors per point)"),
    ("fig-ser-biortho", "SER of bi-orthogonal, dual QPSK and dual 3-PSK; gains at 1e-4"),
    ("tab-papr", "symbol-level and RRC-shaped PAPR of all twelve modulations"),
    ("fig-jitter", "Gardner timing jitter, single vs dual polarization, against the MCRB"),
];

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|k| from + k as f64 * step).collect()
}

fn cmp(a: &str, b: &str) -> Comparison {
    Comparison {
        a: a.into(),
        b: b.into(),
    }
}

fn lam(count: usize) -> ConstellationSpec {
    ConstellationSpec::D4Lam {
        count,
        offset: None,
    }
}

fn sphere64() -> ConstellationSpec {
    ConstellationSpec::Sphere {
        count: 64,
        seed: None,
        restarts: None,
    }
}

fn cyl64() -> ConstellationSpec {
    ConstellationSpec::HexCylinder {
        count: 64,
        amp_x: 1.0,
        amp_y: 1.0,
    }
}

fn ser_preset(name: &str, specs: Vec<ConstellationSpec>, esn0: Vec<f64>, pairs: Vec<Comparison>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(name, ExperimentKind::SerSweep);
    c.seed = 1;
    c.constellations = specs;
    c.esn0_grid_db = esn0;
    c.comparisons = pairs;
    c
}

/// The configuration behind a preset name.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    use ClassicKind::*;
    let classic = ConstellationSpec::classic;
    Some(match name {
        "fig-ser-6bit" => ser_preset(
            name,
            vec![lam(88), sphere64(), classic(Psk8), classic(HexQam8)],
            grid(8.0, 24.0, 0.5),
            vec![
                cmp("88-LAM", "dual 8-PSK"),
                cmp("88-LAM", "dual 8-hex-QAM"),
                cmp("64-4D-PSK", "88-LAM"),
            ],
        ),
        "fig-ser-8bit" => ser_preset(
            name,
            vec![lam(256), classic(Qam16), classic(Apsk16)],
            grid(12.0, 26.0, 0.5),
            vec![
                cmp("256-LAM", "dual 16-QAM"),
                cmp("256-LAM", "dual 16-APSK"),
            ],
        ),
        "fig-ser-cyl" => {
            let mut c = ser_preset(
                name,
                vec![cyl64(), classic(Psk8)],
                grid(12.0, 24.0, 0.5),
                vec![cmp("hex-cyl-64-PSK", "dual 8-PSK")],
            );
            c.monte_carlo.min_errors = 500;
            c
        }
        "fig-ser-biortho" => ser_preset(
            name,
            vec![
                ConstellationSpec::Biorthogonal { rotated: true },
                classic(Qpsk),
                classic(Psk3),
            ],
            grid(4.0, 18.0, 0.5),
            vec![
                cmp("bi-orthogonal", "dual QPSK"),
                cmp("bi-orthogonal", "dual 3-PSK"),
            ],
        ),
        "tab-papr" => {
            let mut c = ExperimentConfig::new(name, ExperimentKind::PaprTable);
            c.seed = 1;
            c.constellations = vec![
                lam(256),
                classic(Qam16),
                classic(Apsk16),
                lam(88),
                sphere64(),
                classic(HexQam8),
                cyl64(),
                classic(Psk8),
                ConstellationSpec::Biorthogonal { rotated: true },
                ConstellationSpec::BiorthogonalAlt,
                classic(Qpsk),
                classic(Psk3),
            ];
            c
        }
        "fig-jitter" => {
            let mut c = ExperimentConfig::new(name, ExperimentKind::JitterSweep);
            c.seed = 1;
            c.jitter = JitterSettings {
                esn0_db: grid(0.0, 30.0, 5.0),
                prefilter: vec![false, true],
                ..JitterSettings::default()
            };
            c
        }
        _ => return None,
    })
}
