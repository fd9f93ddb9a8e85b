use std::path::Path;

use ising_currents::model::validate_model;
use serde::Serialize;

use crate::config::Config;
use crate::manifest::{Artifacts, CheckRecord};
use crate::CliError;

#[derive(Serialize)]
struct Report {
    dimension: usize,
    reflection_positive: bool,
    finite_range: bool,
    interaction_range: Option<u64>,
    checks: Vec<ising_currents::model::ConditionCheck>,
}

pub fn run(cfg: &Config, out: &mut Artifacts, target: Option<&Path>) -> Result<Vec<CheckRecord>, CliError> {
    let model = cfg.model_unchecked();
    let report = validate_model(&model);
    let path = out.resolve(target, "validate.json");
    out.write_json(
        &path,
        "validate",
        &Report {
            dimension: model.dimension(),
            reflection_positive: model.is_reflection_positive(),
            finite_range: model.is_finite_range(),
            interaction_range: model.interaction_range(),
            checks: report.checks.clone(),
        },
    )?;
    Ok(report
        .checks
        .into_iter()
        .map(|c| CheckRecord::new(c.condition, c.passed, c.witness))
        .collect())
}
