use std::path::Path;

use ising_currents::exact::Target;
use ising_currents::percolation::{
    block_correlation_sums, even_mixing_scan, order_parameters, ConnectivityEstimator, ConnectivityReport,
    InequalityCheck, Labeler, LroChainEstimator, LroChainReport, MixingReport, OrderParameterOptions,
    OrderParameterReport, UniquenessEstimator,
};
use ising_currents::region::{Boundary, Region, Shape};
use ising_currents::sampler::{sample_duplicated, ChainConfig};
use ising_currents::stats::Estimate;
use serde::Serialize;

use super::show;
use crate::config::Config;
use crate::manifest::{Artifacts, CheckRecord};
use crate::CliError;

#[derive(Serialize)]
struct Uniqueness {
    /// Marks the diagnostic as a finite-volume proxy, not a proof of uniqueness.
    label: &'static str,
    size_fraction: f64,
    threshold: f64,
    frequency: Estimate,
    passed: bool,
}

#[derive(Serialize)]
struct OrderInequalities {
    parameters: OrderParameterReport,
    checks: Vec<InequalityCheck>,
}

#[derive(Serialize)]
struct Report {
    beta: f64,
    half_width: usize,
    samples: u64,
    block_half_width: usize,
    lro_chain: LroChainReport,
    connectivity: ConnectivityReport,
    uniqueness: Uniqueness,
    order_parameters: Option<OrderInequalities>,
    mixing: Option<MixingReport>,
}

fn inequality_record(c: &InequalityCheck) -> CheckRecord {
    CheckRecord::new(
        c.name.clone(),
        c.holds,
        format!("lhs {} rhs {} slack {:.2e}", show(&c.lhs), show(&c.rhs), c.slack),
    )
}

pub fn run(cfg: &Config, out: &mut Artifacts, target: Option<&Path>) -> Result<Vec<CheckRecord>, CliError> {
    let region = cfg.region()?;
    if !matches!(region.shape(), Shape::Box { .. }) || cfg.bc != Boundary::Plus {
        return Err(CliError::Usage("percolate needs a box with bc = plus".into()));
    }
    let model = cfg.model()?;
    let p = &cfg.percolation;
    let chain = cfg.chain();
    let samples = chain.measurements();
    let block_k = p.block.unwrap_or(cfg.l / 2).min(cfg.l);
    let block = region.sub_box(block_k);

    let origin = region.center() as u32;
    let mut pairs = vec![(origin, Target::Ghost)];
    for k in 1..=cfg.l as i64 {
        let mut x = vec![0i64; cfg.dimension];
        x[0] = k;
        pairs.push((origin, Target::Vertex(region.vertex_at(&x).unwrap() as u32)));
    }
    let labeler = Labeler::new(&region);
    let mut lro = LroChainEstimator::new(&region, &block, samples)?;
    let mut unique = UniquenessEstimator::new(&region, p.uniqueness_fraction, samples)?;
    let mut conn = ConnectivityEstimator::new(&region, &pairs, samples)?;
    sample_duplicated(&region, &chain, |open| {
        let labels = labeler.label(open);
        lro.observe(&labels);
        unique.observe(&labels);
        conn.observe(&labels);
    })?;

    let free = Region::lattice_box(&model, cfg.l, Boundary::Free)?;
    let spin = ChainConfig {
        boundary: Boundary::Free,
        algorithm: p.spin_algorithm,
        ..chain.clone()
    };
    let corr_sum = block_correlation_sums(&free, &spin, &[block])?[0];
    let lro_chain = lro.finish(corr_sum)?;
    let frequency = unique.finish()?;
    let uniqueness = Uniqueness {
        label: "finite-volume proxy",
        size_fraction: p.uniqueness_fraction,
        threshold: p.uniqueness_threshold,
        frequency,
        passed: frequency.mean < p.uniqueness_threshold,
    };

    let mut checks: Vec<CheckRecord> = lro_chain.checks.iter().map(inequality_record).collect();
    checks.push(CheckRecord::new(
        "uniqueness-proxy",
        uniqueness.passed,
        format!("frequency {} below {}", show(&frequency), p.uniqueness_threshold),
    ));

    let order = if p.order_parameters {
        let options = OrderParameterOptions {
            family: p.block_family,
            spin_algorithm: p.spin_algorithm,
            cross_check: p.cross_check,
        };
        let parameters = order_parameters(&model, cfg.l, &chain, &options)?;
        let ineq = vec![
            InequalityCheck::new("M~_LRO <= M_LRO", parameters.m_tilde, parameters.m_lro),
            InequalityCheck::new("M_LRO <= m*", parameters.m_lro, parameters.m_star),
        ];
        checks.extend(ineq.iter().map(inequality_record));
        Some(OrderInequalities {
            parameters,
            checks: ineq,
        })
    } else {
        None
    };

    let mixing = if p.mixing_separations.is_empty() {
        None
    } else {
        let spin_plus = ChainConfig {
            algorithm: p.spin_algorithm,
            ..chain.clone()
        };
        let m = even_mixing_scan(&region, &spin_plus, &p.mixing_separations)?;
        checks.push(CheckRecord::new(
            "even-mixing-decreasing",
            m.decreasing,
            format!("log slope {:?}", m.log_slope),
        ));
        Some(m)
    };

    let report = Report {
        beta: cfg.beta,
        half_width: cfg.l,
        samples,
        block_half_width: block_k,
        lro_chain,
        connectivity: conn.finish()?,
        uniqueness,
        order_parameters: order,
        mixing,
    };
    let path = out.resolve(target, "percolate.json");
    out.write_json(&path, "percolate", &report)?;
    Ok(checks)
}
