use std::path::Path;

use ising_currents::percolation::{order_parameters, OrderParameterOptions, OrderParameterReport};
use rayon::prelude::*;

use crate::config::Config;
use crate::manifest::{num, Artifacts, CheckRecord};
use crate::CliError;

const HEADER: &str =
    "L,beta,m_star,m_star_err,m_lro,m_lro_err,m_tilde,m_tilde_err,chi,chi_err,n,seed,m_star_monotone";

/// `m*` may dip below its predecessor by at most three combined standard errors.
fn monotone_flags(rows: &[OrderParameterReport]) -> Vec<bool> {
    let mut flags = vec![true; rows.len()];
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1].m_star, &rows[i].m_star);
        flags[i] = b.mean >= a.mean - 3.0 * a.combined(b);
    }
    flags
}

pub fn run(cfg: &Config, out: &mut Artifacts, target: Option<&Path>) -> Result<Vec<CheckRecord>, CliError> {
    let model = cfg.model()?;
    let betas = cfg.betas()?;
    let sides = if cfg.scan.sides.is_empty() { vec![cfg.l] } else { cfg.scan.sides.clone() };
    let options = OrderParameterOptions {
        family: cfg.percolation.block_family,
        spin_algorithm: cfg.percolation.spin_algorithm,
        cross_check: cfg.percolation.cross_check,
    };
    let jobs: Vec<(usize, f64)> = sides.iter().flat_map(|&l| betas.iter().map(move |&b| (l, b))).collect();
    let reports = jobs
        .par_iter()
        .map(|&(l, beta)| {
            let chain = ising_currents::sampler::ChainConfig { beta, ..cfg.chain() };
            order_parameters(&model, l, &chain, &options)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(reports.len());
    let mut checks = Vec::new();
    for (i, chunk) in reports.chunks(betas.len()).enumerate() {
        let flags = monotone_flags(chunk);
        for (r, flag) in chunk.iter().zip(&flags) {
            rows.push(format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.half_width,
                num(r.beta),
                num(r.m_star.mean),
                num(r.m_star.stderr),
                num(r.m_lro.mean),
                num(r.m_lro.stderr),
                num(r.m_tilde.mean),
                num(r.m_tilde.stderr),
                num(r.chi.mean),
                num(r.chi.stderr),
                r.chi.n,
                cfg.seed,
                flag
            ));
        }
        let bad = flags.iter().filter(|f| !**f).count();
        checks.push(CheckRecord::new(
            format!("m_star-monotone L={}", sides[i]),
            bad == 0,
            format!("{bad} of {} steps decrease beyond 3 sigma", flags.len().saturating_sub(1)),
        ));
    }
    let path = out.resolve(target, "scan.csv");
    out.write_csv(&path, "scan", HEADER, &rows)?;
    Ok(checks)
}
