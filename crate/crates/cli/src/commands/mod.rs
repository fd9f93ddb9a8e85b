//! One module per subcommand. Each returns the assertions it made; files go
//! through [`Artifacts`] so the manifest can hash them.

mod oracle;
mod percolate;
mod sample;
mod scan;
mod spectral;
mod validate;

use ising_currents::stats::Estimate;

use crate::config::Config;
use crate::manifest::{Artifacts, CheckRecord};
use crate::{CliError, Command};

pub fn dispatch(cmd: &Command, cfg: &Config, out: &mut Artifacts) -> Result<Vec<CheckRecord>, CliError> {
    let target = cmd.common().out.as_deref();
    match cmd {
        Command::Validate { .. } => validate::run(cfg, out, target),
        Command::Oracle { check, expected, .. } => oracle::run(cfg, out, target, check, expected.as_deref()),
        Command::Sample {
            observables,
            dump_currents,
            ..
        } => sample::run(cfg, out, target, observables, *dump_currents),
        Command::Percolate { .. } => percolate::run(cfg, out, target),
        Command::Spectral { check, .. } => spectral::run(cfg, out, target, *check),
        Command::Scan { .. } => scan::run(cfg, out, target),
    }
}

fn show(e: &Estimate) -> String {
    format!("{:.6} +/- {:.2e}", e.mean, e.stderr)
}
