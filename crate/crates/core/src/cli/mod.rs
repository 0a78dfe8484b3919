//! Command-line front end.
//!
//! Every subcommand resolves a [`RunConfig`] (defaults, then the `--config`
//! file, then flags), computes, and writes its artifacts plus `manifest.json`
//! into the output directory. Failures print one JSON object on stderr.

pub mod config;
pub mod jobs;
pub mod output;
pub mod recipes;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use config::RunConfig;
pub use jobs::Run;

use crate::{Error, Result};

/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures during a run.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "kagome-am", version, about = "Breathing-Kagome atomic metasurface simulator")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, env = "KAGOME_AM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Artifact directory (overrides run.out).
    #[arg(long, global = true, env = "KAGOME_AM_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores (overrides run.threads).
    #[arg(long, global = true, env = "KAGOME_AM_THREADS")]
    pub threads: Option<usize>,
    /// Base seed (overrides run.seed).
    #[arg(long, global = true, env = "KAGOME_AM_SEED")]
    pub seed: Option<u64>,
    /// Lattice-sum radius in units of d (overrides bloch.sum_radius_d).
    #[arg(long, global = true, env = "KAGOME_AM_SUM_RADIUS")]
    pub sum_radius: Option<f64>,
    /// Suppress progress messages.
    #[arg(long, global = true, env = "KAGOME_AM_QUIET")]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// All-to-all dipole couplings.
    Full,
    /// Nearest-neighbour tight binding fitted to the dipole couplings.
    Tb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1c,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig1c => "fig1c",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Export flake geometry.
    Lattice,
    /// Infinite-lattice band structure along Gamma-K-M-Gamma.
    Bands,
    /// Diagonalize one finite array (with the impurity, if configured).
    Spectrum {
        #[arg(long, value_enum, default_value = "full")]
        model: Model,
    },
    /// Corner-mode tracking over in-plane polarization angles.
    SweepTheta,
    /// Spectra over a grid of spacing imbalances.
    SweepDelta,
    /// Corner-mode survival under positional disorder.
    Disorder,
    /// Impurity emission dynamics.
    Dynamics {
        /// Named preset (fig5a..fig5f, fig3g..fig3i).
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Canned figure recipe.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Lattice => "lattice".into(),
            Command::Bands => "bands".into(),
            Command::Spectrum { .. } => "spectrum".into(),
            Command::SweepTheta => "sweep-theta".into(),
            Command::SweepDelta => "sweep-delta".into(),
            Command::Disorder => "disorder".into(),
            Command::Dynamics { .. } => "dynamics".into(),
            Command::Reproduce { figure } => format!("reproduce {}", figure.name()),
        }
    }
}

impl Cli {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.run.out = out.clone();
        }
        if let Some(t) = self.threads {
            cfg.run.threads = t;
        }
        if let Some(s) = self.seed {
            cfg.run.seed = s;
        }
        if let Some(r) = self.sum_radius {
            cfg.bloch.sum_radius_d = r;
        }
        if let Command::Dynamics { scenario: Some(s) } = &self.command {
            cfg.dynamics.scenario = Some(s.clone());
        }
        Ok(cfg)
    }
}

/// Configures the worker pool. Dense kernels run single-threaded so results
/// do not depend on the thread count.
pub fn init_runtime(threads: usize) {
    faer::set_global_parallelism(faer::Par::Seq);
    // a pool configured earlier in this process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

pub fn execute(cli: &Cli) -> Result<PathBuf> {
    let cfg = cli.resolve()?;
    init_runtime(cfg.run.threads);
    let mut run = Run::open(cfg, cli.command.name(), cli.quiet)?;
    match &cli.command {
        Command::Lattice => jobs::lattice(&mut run)?,
        Command::Bands => jobs::bands(&mut run)?,
        Command::Spectrum { model } => jobs::spectrum(&mut run, *model)?,
        Command::SweepTheta => jobs::sweep_theta(&mut run)?,
        Command::SweepDelta => jobs::sweep_delta(&mut run)?,
        Command::Disorder => jobs::disorder(&mut run)?,
        Command::Dynamics { .. } => jobs::dynamics(&mut run)?,
        Command::Reproduce { figure } => recipes::reproduce(&mut run, *figure)?,
    }
    run.finish()
}

pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownScenario(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args`, runs, and returns the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", error_json("usage", e.to_string().trim_end()));
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(manifest) => {
            if !cli.quiet {
                eprintln!("wrote {}", manifest.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            exit_code(&e)
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run_from(std::env::args_os()))
}
