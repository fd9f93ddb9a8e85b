use std::path::Path;
use std::sync::Arc;

use ising_currents::region::Shape;
use ising_currents::rng::chain_rng;
use ising_currents::sampler::{sample_current, spin_mc_run, worm_run, Algorithm, EstimateSeries, Observable};

use crate::config::Config;
use crate::manifest::{Artifacts, CheckRecord};
use crate::CliError;

/// Chain id of the stream that turns dumped parity patterns into currents.
const DUMP_CHAIN: u64 = 100;

/// Correlations from the origin to the sites `k e_1` and magnetizations at
/// the origin and those sites, `k` up to the box half-width or half the torus side.
fn observables(cfg: &Config, region: &ising_currents::Lattice, names: &[String]) -> Result<Vec<Observable>, CliError> {
    let reach = match region.shape() {
        Shape::Box { half_width } => half_width,
        Shape::Torus { side } => side / 2,
        Shape::Graph => 0,
    } as i64;
    let origin = region.center() as u32;
    let axis = |k: i64| -> u32 {
        let mut x = vec![0i64; cfg.dimension];
        x[0] = k;
        region.vertex_at(&x).expect("axis site inside the region") as u32
    };
    let mut out = Vec::new();
    for name in names {
        match name.trim() {
            "corr" => out.extend((1..=reach).map(|k| Observable::corr(origin, axis(k)))),
            "mag" => out.extend((0..=reach).map(|k| Observable::mag(axis(k)))),
            other => return Err(CliError::Usage(format!("unknown observable `{other}`; expected corr or mag"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no observables requested".into()));
    }
    Ok(out)
}

pub fn run(
    cfg: &Config,
    out: &mut Artifacts,
    target: Option<&Path>,
    names: &[String],
    dump: Option<usize>,
) -> Result<Vec<CheckRecord>, CliError> {
    let region = cfg.region()?;
    let obs = observables(cfg, &region, names)?;
    let chain = cfg.chain();
    let mut dumped = Vec::new();
    let series: EstimateSeries = match chain.algorithm {
        Algorithm::Worm => {
            let want = dump.unwrap_or(0);
            worm_run(&region, &chain, &obs, |p| {
                if dumped.len() < want {
                    dumped.push(p.clone());
                }
            })?
            .series
        }
        a if a.is_spin() => {
            if dump.is_some() {
                return Err(CliError::Usage("--dump-currents needs the worm algorithm".into()));
            }
            spin_mc_run(&region, &chain, &obs)?.series
        }
        a => return Err(CliError::Usage(format!("sample supports worm and spin algorithms, not {a}"))),
    };

    let path = out.resolve(target, "sample.csv");
    out.write_csv(&path, "sample", EstimateSeries::CSV_HEADER, &series.csv_rows())?;
    if dump.is_some() {
        let shared = Arc::new(region.clone());
        let mut rng = chain_rng(cfg.seed, DUMP_CHAIN);
        let mut text = String::new();
        for p in &dumped {
            text.push_str(&sample_current(p, shared.clone(), cfg.beta, &mut rng)?.to_text());
        }
        let dump_path = path.with_extension("currents.txt");
        out.write(&dump_path, text.as_bytes())?;
    }

    let finite = series.entries.iter().all(|e| e.estimate.mean.is_finite() && e.estimate.stderr.is_finite());
    let mut detail = format!("{} observables, {} algorithm", series.entries.len(), series.algorithm);
    for n in &series.notes {
        detail.push_str("; ");
        detail.push_str(n);
    }
    Ok(vec![CheckRecord::new("finite-estimates", finite, detail)])
}
