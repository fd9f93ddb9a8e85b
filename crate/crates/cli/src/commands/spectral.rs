use std::path::Path;

use ising_currents::region::Boundary;
use ising_currents::spectral::{
    block_average_green, green_function, infrared_check, transience_classify, GreenEntry, SpectralReport, Volume,
};
use serde::Serialize;

use crate::config::{Config, ShapeSpec};
use crate::manifest::{Artifacts, CheckRecord};
use crate::{CliError, SpectralCheck};

#[derive(Serialize)]
struct Report {
    #[serde(flatten)]
    spectral: SpectralReport,
    notes: Vec<String>,
}

pub fn run(
    cfg: &Config,
    out: &mut Artifacts,
    target: Option<&Path>,
    check: SpectralCheck,
) -> Result<Vec<CheckRecord>, CliError> {
    let model = cfg.model()?;
    let wants = |c: SpectralCheck| check == c || check == SpectralCheck::All;
    let mut report = SpectralReport::default();
    let mut notes = Vec::new();
    let mut checks = Vec::new();

    if wants(SpectralCheck::Infrared) {
        if cfg.shape != ShapeSpec::Torus {
            return Err(CliError::Usage("the infrared check runs on a torus; set shape = torus".into()));
        }
        let chain = ising_currents::sampler::ChainConfig {
            boundary: Boundary::Free,
            ..cfg.chain()
        };
        let ir = infrared_check(&model, cfg.beta, cfg.l, &chain)?;
        let n = ir.entries.iter().filter(|e| e.energy > 0.0).count();
        checks.push(CheckRecord::new(
            "infrared-bound",
            ir.holds,
            format!(
                "{} of {n} nonzero momenta violate F(p) <= 1/(2 beta E(p)) + 3 sigma; worst margin {:.4e} at {:?}",
                ir.violations, ir.worst_margin, ir.worst_mode
            ),
        ));
        checks.push(CheckRecord::new(
            "infrared-bound-ordered-pairs",
            ir.holds_ordered,
            format!("{} of {n} nonzero momenta violate F(p) <= 1/(beta E(p)) + 3 sigma", ir.violations_ordered),
        ));
        report.infrared = Some(ir);
    }

    if wants(SpectralCheck::Transience) {
        let t = transience_classify(&model)?;
        let detail = format!("verdict {}, exponent {:.4}, growth ratio {:.4}", t.verdict, t.exponent, t.growth_ratio);
        match &cfg.spectral.expect {
            Some(expect) => {
                let verdict = t.verdict.to_string();
                let ok = expect.split(['|', '/', ',']).any(|e| e.trim() == verdict);
                checks.push(CheckRecord::new("transience", ok, format!("{detail}; expected {expect}")));
            }
            None => checks.push(CheckRecord::new("transience", true, detail)),
        }
        report.transience = Some(t);
    }

    if wants(SpectralCheck::Green) {
        let mut volumes = vec![Volume::Infinite];
        if cfg.shape == ShapeSpec::Torus {
            volumes.push(Volume::Torus(cfg.l));
        }
        let origin = vec![0i64; cfg.dimension];
        for x in &cfg.spectral.green {
            if x.len() != cfg.dimension {
                return Err(CliError::Usage(format!("green displacement {x:?} is not {}-dimensional", cfg.dimension)));
            }
            for &volume in &volumes {
                let r = green_function(&model, x, &origin, volume);
                report.green.push(GreenEntry {
                    displacement: x.clone(),
                    volume,
                    value: r.as_ref().ok().copied(),
                    error: r.err().map(|e| e.to_string()),
                });
            }
        }
        for &n in &cfg.spectral.block_averages {
            match block_average_green(&model, n) {
                Ok(v) => report.block_averages.push((n, v)),
                Err(e) => notes.push(format!("block average n = {n}: {e}")),
            }
        }
        let resolved = report.green.iter().filter(|g| g.value.is_some()).count();
        checks.push(CheckRecord::new(
            "green",
            true,
            format!("{resolved} of {} values resolved", report.green.len()),
        ));
    }

    let path = out.resolve(target, "spectral.json");
    out.write_json(&path, "spectral", &Report { spectral: report, notes })?;
    Ok(checks)
}
