use std::collections::BTreeMap;
use std::path::Path;

use ising_currents::exact::{EXACT_ABS_FLOOR, EXACT_REL_TOL};
use ising_currents::num::close;
use ising_currents::suite::{run_check, CheckKind, SuiteCheck, SuiteOptions};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::manifest::{Artifacts, CheckRecord};
use crate::CliError;

#[derive(Serialize)]
struct Report {
    seed: u64,
    options: SuiteOptions,
    checks: Vec<SuiteCheck>,
}

/// Either a flat `values` map or an earlier oracle report.
#[derive(Deserialize)]
struct Expected {
    #[serde(default)]
    values: BTreeMap<String, f64>,
    #[serde(default)]
    checks: Vec<ExpectedCheck>,
}

#[derive(Deserialize)]
struct ExpectedCheck {
    #[serde(default)]
    values: BTreeMap<String, f64>,
}

fn kinds(spec: &str) -> Result<Vec<CheckKind>, CliError> {
    if spec == "all" {
        return Ok(CheckKind::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| {
            CheckKind::parse(s.trim()).ok_or_else(|| {
                let names: Vec<&str> = CheckKind::ALL.iter().map(|k| k.name()).collect();
                CliError::Usage(format!("unknown check `{s}`; expected all or one of {}", names.join(", ")))
            })
        })
        .collect()
}

pub fn run(
    cfg: &Config,
    out: &mut Artifacts,
    target: Option<&Path>,
    check: &str,
    expected: Option<&Path>,
) -> Result<Vec<CheckRecord>, CliError> {
    let kinds = kinds(check)?;
    let expected_text = expected
        .map(|p| {
            std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read expected values {}: {e}", p.display())))
        })
        .transpose()?;
    let options = SuiteOptions {
        seed: cfg.seed,
        random_regions: cfg.oracle.random_regions,
        sampler_seeds: cfg.oracle.sampler_seeds,
        sampler_samples: cfg.oracle.sampler_samples,
        sampler_beta: cfg.oracle.sampler_beta,
    };
    let checks = kinds
        .iter()
        .map(|&k| run_check(k, &options))
        .collect::<Result<Vec<_>, _>>()?;

    let mut records: Vec<CheckRecord> = checks
        .iter()
        .map(|c| {
            let mut detail = format!(
                "{} cases, {} failures, max deviation {:e}",
                c.cases, c.failures, c.max_deviation
            );
            for n in &c.notes {
                detail.push_str("; ");
                detail.push_str(n);
            }
            CheckRecord::new(c.name.clone(), c.passed, detail)
        })
        .collect();
    if let Some(text) = expected_text {
        let computed: BTreeMap<&str, f64> = checks
            .iter()
            .flat_map(|c| c.values.iter().map(|(k, v)| (k.as_str(), *v)))
            .collect();
        records.push(compare_expected(&text, &computed));
    }

    let path = out.resolve(target, "oracle.json");
    out.write_json(
        &path,
        "oracle",
        &Report {
            seed: cfg.seed,
            options,
            checks,
        },
    )?;
    Ok(records)
}

/// Every expected value must be present and agree to the exact tolerance.
/// A file that does not parse fails the comparison.
fn compare_expected(text: &str, computed: &BTreeMap<&str, f64>) -> CheckRecord {
    let expected: Expected = match serde_json::from_str(text) {
        Ok(e) => e,
        Err(e) => return CheckRecord::new("expected-values", false, format!("unreadable expected values: {e}")),
    };
    let mut wanted = expected.values;
    for c in expected.checks {
        wanted.extend(c.values);
    }
    let mut compared = 0usize;
    let mut bad = Vec::new();
    for (key, want) in &wanted {
        match computed.get(key.as_str()) {
            // an entry of a check that was not run is skipped
            None if !computed.keys().any(|k| k.split('/').next() == key.split('/').next()) => continue,
            None => bad.push(format!("{key}: missing")),
            Some(&got) if !close(got, *want, EXACT_REL_TOL, EXACT_ABS_FLOOR) => {
                bad.push(format!("{key}: expected {want:e}, got {got:e}"))
            }
            Some(_) => {}
        }
        compared += 1;
    }
    let passed = bad.is_empty() && compared > 0;
    let detail = if compared == 0 {
        "no expected value matches a computed one".to_string()
    } else if bad.is_empty() {
        format!("{compared} values agree")
    } else {
        format!("{} of {compared} values differ; first {}", bad.len(), bad[0])
    };
    CheckRecord::new("expected-values", passed, detail)
}
