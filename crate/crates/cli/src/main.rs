//! `ising-currents`: runs the library's checks and experiments from a JSON
//! configuration and records every output file in a run manifest.
//!
//! Exit status: 0 when every requested assertion passes, 2 when one fails,
//! 1 on usage, configuration or library errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ising_currents::region::Boundary;
use ising_currents::sampler::Algorithm;

use config::{Config, Overrides, SCHEMA_VERSION};
use manifest::{Artifacts, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] ising_currents::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "ising-currents", version, about = "Random current tools for ferromagnetic Ising models")]
struct Cli {
    /// Directory for reports, data files and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// JSON configuration, or the manifest of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Box half-width or torus side.
    #[arg(long = "L", visible_alias = "side")]
    l: Option<usize>,
    #[arg(long, value_parser = parse_boundary)]
    bc: Option<Boundary>,
    #[arg(long)]
    sweeps: Option<u64>,
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Option<Algorithm>,
    /// Output file, relative to --out-dir unless absolute.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.parse().map_err(|e: ising_currents::Error| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: ising_currents::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpectralCheck {
    Infrared,
    Transience,
    Green,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the coupling conditions of the configured model.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Exact identities on the bundled corpus and seeded random regions.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// `all` or a comma-separated subset of representation, switching,
        /// connectivity, sandwich, parity-event, sampler.
        #[arg(long, default_value = "all")]
        check: String,
        /// Reference values (an earlier oracle report) to compare against.
        #[arg(long)]
        expected: Option<PathBuf>,
    },
    /// Monte Carlo estimates of correlations and magnetizations.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "corr,mag")]
        observables: Vec<String>,
        /// Also write the first N sampled currents (worm only).
        #[arg(long)]
        dump_currents: Option<usize>,
    },
    /// Duplicated-current percolation inequalities and order parameters.
    Percolate {
        #[command(flatten)]
        common: Common,
    },
    /// Infrared bound, Green functions and transience.
    Spectral {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        check: SpectralCheck,
    },
    /// Order parameters over a grid of inverse temperatures.
    Scan {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Validate { .. } => "validate",
            Self::Oracle { .. } => "oracle",
            Self::Sample { .. } => "sample",
            Self::Percolate { .. } => "percolate",
            Self::Spectral { .. } => "spectral",
            Self::Scan { .. } => "scan",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Self::Validate { common }
            | Self::Oracle { common, .. }
            | Self::Sample { common, .. }
            | Self::Percolate { common }
            | Self::Spectral { common, .. }
            | Self::Scan { common } => common,
        }
    }
}

fn load_config(cmd: &Command) -> Result<Config, CliError> {
    let common = cmd.common();
    let mut cfg = match (&common.config, cmd) {
        (Some(path), _) => Config::load(path)?,
        (None, Command::Oracle { .. }) => Config::default_oracle(),
        (None, _) => return Err(CliError::Usage(format!("`{}` needs --config", cmd.name()))),
    };
    cfg.apply(&Overrides {
        beta: common.beta,
        seed: common.seed,
        l: common.l,
        bc: common.bc,
        sweeps: common.sweeps,
        algorithm: common.algorithm,
    })?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let started = chrono::Utc::now().to_rfc3339();
    let cfg = load_config(&cli.command)?;
    let mut artifacts = Artifacts::new(&cli.out_dir)?;
    let checks = commands::dispatch(&cli.command, &cfg, &mut artifacts)?;

    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    let exit_code = if checks.iter().all(|c| c.passed) { 0 } else { 2 };
    let path = artifacts.dir().join("manifest.json");
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        kind: "manifest",
        command: cli.command.name().into(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        config: cfg,
        threads: rayon::current_num_threads(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        checks,
        files: artifacts.into_files(),
        exit_code,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
