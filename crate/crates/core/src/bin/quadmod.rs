use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quadmod::constellation::io::write_constellation;
use quadmod::experiment::{preset, run_experiment, ConstellationSpec, ExperimentConfig, PRESETS};
use quadmod::Error;

#[derive(Parser)]
#[command(name = "quadmod", version, about = "Dual-polarization 4-D modulation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a preset or a TOML experiment file.
    Run {
        /// Preset name (see `list-presets`) or path to a config file.
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write one constellation in the interchange format.
    ExportConstellation {
        /// e.g. 256-LAM, 88-LAM, 64-4D-PSK, hex-cyl-64-PSK, bi-orthogonal, dual-16-QAM
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in experiment presets.
    ListPresets,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_UNDERRESOLVED: u8 = 3;

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config { .. } | Error::Parse { .. } | Error::InvalidParameter(_) => {
            ExitCode::from(EXIT_VALIDATION)
        }
        _ => ExitCode::FAILURE,
    }
}

fn load(target: &str) -> Result<ExperimentConfig, Error> {
    if let Some(c) = preset(target) {
        return Ok(c);
    }
    let text = std::fs::read_to_string(target).map_err(|e| Error::Io {
        path: target.into(),
        source: e,
    })?;
    ExperimentConfig::from_toml(&text)
}

fn run(target: String, seed: Option<u64>, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load(&target) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    match run_experiment(&cfg) {
        Ok(sum) => {
            print!("{}", sum.render());
            if sum.underresolved {
                eprintln!("warning: some points did not reach the error target; outputs kept");
                ExitCode::from(EXIT_UNDERRESOLVED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run {
            target,
            seed,
            out,
            jobs,
        } => {
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                if j == 0 {
                    eprintln!("error: --jobs must be at least 1");
                    return ExitCode::from(EXIT_VALIDATION);
                }
                pool = pool.num_threads(j);
            }
            match pool.build() {
                Ok(p) => p.install(|| run(target, seed, out)),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Cmd::ExportConstellation { name, out } => {
            let Some(spec) = ConstellationSpec::from_name(&name) else {
                eprintln!("error: unknown constellation `{name}`");
                return ExitCode::from(EXIT_VALIDATION);
            };
            match spec.build().and_then(|c| write_constellation(&c, &out)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    exit_code(&e)
                }
            }
        }
        Cmd::ListPresets => {
            for (name, about) in PRESETS {
                println!("{name:18} {about}");
            }
            ExitCode::SUCCESS
        }
    }
}
