//! Acceptance run over the library's headline properties. Prints one
//! `PASS`/`FAIL` line per property with its runtime against the budget and
//! exits nonzero if any property fails. A command-line argument restricts the
//! run to properties whose name contains it.

mod oracle;

use std::sync::Arc;
use std::time::{Duration, Instant};

use ising_currents::currents::{Current, SourceSet};
use ising_currents::exact::{
    exact_connectivity_prob, parity_event_prob, partition_current, partition_spin, spin_moments, verify_eq10,
    verify_gamma_sandwich, ParityCorrelations, Target,
};
use ising_currents::percolation::{order_parameters, InequalityCheck, Labeler, OrderParameterOptions, UniquenessEstimator};
use ising_currents::region::{Boundary, Region, GHOST};
use ising_currents::rng::chain_rng;
use ising_currents::sampler::corpus::{connected_graphs, random_region, small_graphs};
use ising_currents::sampler::{
    chi_square_validate, sample_duplicated, spin_mc_run, worm_run, worm_run_with, Algorithm, ChainConfig, Observable,
    WormMode,
};
use ising_currents::spectral::{infrared_check, transience_classify, Transience};
use ising_currents::stats::{chi_square, Estimate};
use ising_currents::transfer::{transfer_matrix_strip, StripSpec};
use ising_currents::{Model, Result};
use oracle::Graph;
use rand::Rng;

const TOL: f64 = 1e-10;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

/// `|a - b| <= TOL max(1, |a|, |b|)`.
fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

fn deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn show(e: &Estimate) -> String {
    format!("{:.4} +/- {:.4}", e.mean, e.stderr)
}

/// Random connected regions: up to `v` vertices, `e` edges (ghost edges
/// included), odd indices carry a ghost; inverse temperature in `(0, 1.5]`.
fn regions(stream: u64, count: usize, v: usize, e: usize, plus: impl Fn(usize) -> bool) -> Result<Vec<(Region<f64>, f64)>> {
    (0..count)
        .map(|i| {
            let mut rng = chain_rng(2024, stream + i as u64);
            let r = random_region(&mut rng, v, e, plus(i))?;
            let beta = 1.5 * (1.0 - rng.random::<f64>());
            Ok((r, beta))
        })
        .collect()
}

fn representation_equivalence() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut plus = 0;
    let list = regions(100, 60, 10, 14, |i| i % 2 == 1)?;
    for (region, beta) in &list {
        let g = Graph::of(region);
        let n = g.n;
        plus += usize::from(region.has_ghost());
        let spins = oracle::spins(&g, *beta);
        let currents = oracle::log_z_currents(&g, *beta) + n as f64 * std::f64::consts::LN_2;
        let lib_spin = partition_spin(region, *beta)?;
        let lib_current = partition_current(region, *beta, &SourceSet::new())? + n as f64 * std::f64::consts::LN_2;
        // relative error of Z is the absolute error of ln Z
        for (a, b) in [(spins.log_z, currents), (lib_spin, spins.log_z), (lib_current, spins.log_z)] {
            worst = worst.max((a - b).abs());
            cases += 1;
        }
        let moments = spin_moments(region, *beta)?;
        let parity = ParityCorrelations::new(region, *beta)?;
        for x in 0..n {
            for y in x + 1..n {
                let reference = spins.corr[x][y];
                worst = worst.max(deviation(moments.correlation[x][y], reference));
                worst = worst.max(deviation(parity.corr(x as u32, y as u32)?.value, reference));
                cases += 2;
            }
            if region.has_ghost() {
                worst = worst.max(deviation(moments.magnetization[x], spins.mag[x]));
                worst = worst.max(deviation(parity.magnetization(x as u32)?.value, spins.mag[x]));
                cases += 2;
            }
        }
    }
    Ok(Outcome::new(
        worst <= TOL && list.len() >= 50,
        format!("{} regions ({plus} plus), {cases} comparisons, max deviation {worst:.2e}", list.len()),
    ))
}

fn switching_identity() -> Result<Outcome> {
    let graphs = connected_graphs(5);
    let mut by_size = [0usize; 6];
    graphs.iter().for_each(|g| by_size[g.len()] += 1);
    // connected graphs with 1..=5 edges up to isomorphism: 1, 1, 3, 5, 12
    let census = by_size[1..] == [1, 1, 3, 5, 12];
    let mut cases = 0u64;
    let mut failures = 0u64;
    for edges in &graphs {
        let n = edges.iter().map(|e| e.1 as usize + 1).max().unwrap_or(0);
        let weighted: Vec<(u32, u32, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        let h = Arc::new(Region::from_graph(n, &weighted, &[], 0.0)?);
        let plain: Vec<(usize, usize)> = h.all_edges().map(|e| (e.u as usize, e.v as usize)).collect();
        let e = plain.len();
        for code in 0..4usize.pow(e as u32) {
            let m: Vec<u32> = (0..e).map(|i| (code >> (2 * i) & 3) as u32).collect();
            let current = Current::from_dense(h.clone(), &m);
            for x in 0..n {
                for y in x + 1..n {
                    let (lhs, rhs) = oracle::switching_sides(n, &plain, &m, x, y);
                    let rep = verify_eq10(&current, x, y, &h)?;
                    cases += 1;
                    if lhs != rhs || rep.lhs != lhs || rep.rhs != rhs || !rep.holds {
                        failures += 1;
                    }
                }
            }
        }
    }
    Ok(Outcome::new(
        census && failures == 0,
        format!(
            "{} graphs (by edge count {:?}), {cases} (current, pair) cases, {failures} failures",
            graphs.len(),
            &by_size[1..]
        ),
    ))
}

fn product_identity() -> Result<Outcome> {
    let mut list: Vec<Region<f64>> = Vec::new();
    for edges in connected_graphs(5) {
        let n = edges.iter().map(|e| e.1 as usize + 1).max().unwrap_or(0);
        let weighted: Vec<(u32, u32, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        list.push(Region::from_graph(n, &weighted, &[], 0.0)?);
    }
    for g in small_graphs() {
        list.push(g.region()?);
    }
    list.extend(regions(200, 40, 7, 8, |i| i % 2 == 1)?.into_iter().map(|r| r.0));
    let mut worst = 0.0f64;
    let mut cases = 0;
    for region in &list {
        assert!(region.num_edges() <= 8);
        let g = Graph::of(region);
        for beta in [0.3, 0.6, 1.0] {
            let free = oracle::spins(&g.free(), beta);
            let plus = oracle::spins(&g, beta);
            for x in 0..g.n {
                for y in x + 1..g.n {
                    let p = exact_connectivity_prob(region, beta, x as u32, Target::Vertex(y as u32))?;
                    worst = worst.max(deviation(p, free.corr[x][y] * plus.corr[x][y]));
                    cases += 1;
                }
            }
        }
    }
    let exact_ok = worst <= TOL;

    // sampled duplicated currents on the 3x3 plus box
    let model = Model::nearest_neighbor(2);
    let region = Region::lattice_box(&model, 1, Boundary::Plus)?;
    let g = Graph::of(&region);
    let c = region.center();
    let mut worst_z = 0.0f64;
    let mut sampled = 0;
    for (k, beta) in [0.3, 0.6].into_iter().enumerate() {
        let cfg = ChainConfig::new(beta, Boundary::Plus, 110_000, 70 + k as u64).with_burn_in(10_000);
        let samples = cfg.measurements();
        let free = oracle::spins(&g.free(), beta);
        let plus = oracle::spins(&g, beta);
        let mut targets: Vec<(Target, f64)> = (0..g.n)
            .filter(|&y| y != c)
            .map(|y| (Target::Vertex(y as u32), free.corr[c][y] * plus.corr[c][y]))
            .collect();
        targets.push((Target::Ghost, exact_connectivity_prob(&region, beta, c as u32, Target::Ghost)?));
        const BATCHES: usize = 100;
        let per = (samples as usize).div_ceil(BATCHES);
        let mut batches = vec![vec![0.0f64; targets.len()]; BATCHES];
        let mut seen = 0usize;
        sample_duplicated(&region, &cfg, |open| {
            let (cluster, ghost) = oracle::open_cluster(&g, &open.0, c);
            let row = &mut batches[seen / per];
            for (j, (t, _)) in targets.iter().enumerate() {
                let hit = match t {
                    Target::Vertex(y) => cluster[*y as usize],
                    Target::Ghost => ghost,
                };
                row[j] += f64::from(u8::from(hit));
            }
            seen += 1;
        })?;
        if seen as u64 != samples || samples < 100_000 {
            return Ok(Outcome::new(false, format!("expected 1e5 samples, got {seen}")));
        }
        let sizes: Vec<f64> = (0..BATCHES).map(|b| (per.min(seen - b * per)) as f64).collect();
        for (j, (_, exact)) in targets.iter().enumerate() {
            let means: Vec<f64> = (0..BATCHES).map(|b| batches[b][j] / sizes[b]).collect();
            let mean = batches.iter().map(|r| r[j]).sum::<f64>() / seen as f64;
            let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
            let sigma = (var / BATCHES as f64).sqrt();
            worst_z = worst_z.max((mean - exact).abs() / sigma.max(1e-300));
            sampled += 1;
        }
    }
    Ok(Outcome::new(
        exact_ok && worst_z <= 3.0,
        format!(
            "{} regions, {cases} exact cases, max deviation {worst:.2e}; 3x3 box: {sampled} sampled events, max |z| {worst_z:.2}",
            list.len()
        ),
    ))
}

fn gamma_sandwich() -> Result<Outcome> {
    let list = regions(300, 20, 8, 12, |_| true)?;
    let mut cases = 0;
    let mut violations = 0;
    let mut worst_gap = 0.0f64;
    let mut tightest = 0.0f64;
    for (region, _) in &list {
        let g = Graph::of(region);
        let coupling = |a: u32, b: u32| {
            g.edges
                .iter()
                .find(|e| e.1.is_some() && ((e.0, e.1) == (a as usize, Some(b as usize)) || (e.0, e.1) == (b as usize, Some(a as usize))))
                .map(|e| e.2)
        };
        for beta in [0.2, 0.5, 1.0] {
            let free = oracle::spins(&g.free(), beta);
            let plus = oracle::spins(&g, beta);
            for x in 0..g.n {
                for y in x + 1..g.n {
                    let rep = verify_gamma_sandwich(region, beta, x as u32, y as u32)?;
                    let gap = plus.corr[x][y] - free.corr[x][y];
                    let mut gamma = 1.0;
                    let mut path_ok = rep.path.first() == Some(&(x as u32)) && rep.path.last() == Some(&(y as u32));
                    for w in rep.path.windows(2) {
                        match coupling(w[0], w[1]) {
                            Some(j) => {
                                let l = beta * j;
                                gamma *= l.tanh().min((l.cosh() - 1.0) / l.sinh());
                            }
                            None => path_ok = false,
                        }
                    }
                    let bound = rep.connection_to_ghost / gamma;
                    worst_gap = worst_gap.max(deviation(rep.gap, gap));
                    if bound > 0.0 {
                        tightest = tightest.max(gap / bound);
                    }
                    cases += 1;
                    let ok = path_ok && agree(rep.gap, gap) && agree(rep.gamma, gamma) && gap >= -TOL && gap <= bound + TOL;
                    violations += usize::from(!ok || !rep.holds());
                }
            }
        }
    }
    Ok(Outcome::new(
        violations == 0,
        format!(
            "{} plus regions, {cases} (pair, beta) cases, {violations} violations; gap deviation {worst_gap:.2e}, max gap/bound {tightest:.3}",
            list.len()
        ),
    ))
}

fn parity_event_formula() -> Result<Outcome> {
    let list = regions(400, 20, 8, 12, |i| i % 2 == 1)?;
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (i, (region, beta)) in list.iter().enumerate() {
        let g = Graph::of(region);
        let m = g.edges.len();
        let mut rng = chain_rng(2024, 500 + i as u64);
        for _ in 0..5 {
            let mask = rng.random_range(1..1u64 << m);
            let set: Vec<usize> = (0..m).filter(|e| mask >> e & 1 == 1).collect();
            let rep = parity_event_prob(region, *beta, &set)?;
            let direct = oracle::even_flux_prob(&g, *beta, &set);
            let cosh: f64 = set.iter().map(|&e| (beta * g.edges[e].2).cosh()).product();
            let via_spins = cosh
                * oracle::spin_mean(&g, *beta, |s| {
                    let k: f64 = set
                        .iter()
                        .map(|&e| {
                            let (u, v, j) = g.edges[e];
                            j * s[u] * v.map_or(1.0, |v| s[v])
                        })
                        .sum();
                    (-beta * k).exp()
                });
            for (a, b) in [(rep.parity_sum, rep.spin_sum), (rep.parity_sum, direct), (rep.spin_sum, via_spins)] {
                worst = worst.max(deviation(a, b));
            }
            cases += 1;
        }
    }
    Ok(Outcome::new(
        worst <= TOL,
        format!("{} regions x 5 edge sets = {cases} cases, max deviation {worst:.2e}", list.len()),
    ))
}

fn infrared_bound() -> Result<Outcome> {
    let model = Model::nearest_neighbor(2);
    let beta = 0.35;
    let cfg = ChainConfig::new(beta, Boundary::Free, 1_010_000, 6)
        .with_burn_in(10_000)
        .with_algorithm(Algorithm::SpinSw);
    let rep = infrared_check(&model, beta, 8, &cfg)?;
    let mut nonzero = 0;
    let mut single = 0;
    let mut ordered = 0;
    let mut energy_ok = true;
    for e in &rep.entries {
        let energy: f64 = e.momentum.iter().map(|p| 2.0 * (1.0 - p.cos())).sum();
        if energy < 1e-12 {
            continue;
        }
        energy_ok &= (energy - e.energy).abs() < 1e-12;
        nonzero += 1;
        let slack = 3.0 * e.f_hat.stderr;
        single += usize::from(e.f_hat.mean > 1.0 / (2.0 * beta * energy) + slack);
        ordered += usize::from(e.f_hat.mean > 1.0 / (beta * energy) + slack);
    }
    let passed = rep.samples >= 1_000_000 && nonzero == 63 && energy_ok && single == 0;
    Ok(Outcome::new(
        passed,
        format!(
            "{} samples; F^(p) <= 1/(2 beta E) + 3 sigma violated at {single} of {nonzero} nonzero momenta \
             (worst margin {:.4} at {:?}); F^(p) <= 1/(beta E) + 3 sigma violated at {ordered}",
            rep.samples, rep.worst_margin, rep.worst_mode
        ),
    ))
}

fn magnetization_2d() -> Result<Outcome> {
    let beta = 0.6;
    let exact = oracle::onsager_magnetization(beta);
    // plus strips of width up to 8: centre magnetization, extrapolated per parity
    let strip = |w: usize| -> Result<f64> {
        let mut spec = StripSpec::strip(w, 61, beta);
        spec.plus = true;
        transfer_matrix_strip(spec)?.magnetization((30, (w - 1) / 2))
    };
    let widths: Vec<f64> = (3..=8).map(strip).collect::<Result<_>>()?;
    let odd = oracle::aitken(widths[0], widths[2], widths[4]);
    let even = oracle::aitken(widths[1], widths[3], widths[5]);
    let oracle_ok = (odd - exact).abs() < 1e-4 && (even - exact).abs() < 1e-4;

    let model = Model::nearest_neighbor(2);
    let region = Region::lattice_box(&model, 64, Boundary::Plus)?;
    let origin = region.center() as u32;
    let cfg = ChainConfig::new(beta, Boundary::Plus, 400_000, 17).with_burn_in(20_000);
    let worm = worm_run_with(&region, &cfg, WormMode::Pinned(GHOST), &[Observable::mag(origin)], |_| {})?;
    let m = worm.series.entries[0].estimate;
    let spin_cfg = ChainConfig::new(beta, Boundary::Plus, 11_000, 18)
        .with_burn_in(1000)
        .with_algorithm(Algorithm::SpinSw);
    let spin = spin_mc_run(&region, &spin_cfg, &[Observable::mag(origin)])?.series.entries[0].estimate;
    let rel = (m.mean - exact).abs() / exact;
    Ok(Outcome::new(
        oracle_ok && rel <= 0.02,
        format!(
            "closed form {exact:.6}, strip extrapolation {odd:.6} (odd widths) {even:.6} (even widths); \
             worm m* {} ({:.2}% off), spin cross-check {}",
            show(&m),
            100.0 * rel,
            show(&spin)
        ),
    ))
}

fn continuity_scan() -> Result<Outcome> {
    let model = Model::nearest_neighbor(3);
    let sides = [8usize, 12, 16];
    let betas: Vec<f64> = (0..7).map(|i| 0.20 + 0.01 * i as f64).collect();
    let mut m_star = vec![Vec::new(); sides.len()];
    let mut m_tilde = Vec::new();
    for (i, &l) in sides.iter().enumerate() {
        for (j, &beta) in betas.iter().enumerate() {
            let cfg = ChainConfig::new(beta, Boundary::Plus, 30_000, 900 + (10 * i + j) as u64).with_burn_in(3000);
            let rep = order_parameters(&model, l, &cfg, &OrderParameterOptions::default())?;
            if j == 0 {
                m_tilde.push(rep.m_tilde);
            }
            m_star[i].push(rep.m_star);
        }
    }
    let mut notes = Vec::new();
    // below the transition region: grid points where every curve is under 1/2
    let low: Vec<usize> = (0..betas.len()).filter(|&j| m_star.iter().all(|c| c[j].mean < 0.5)).collect();
    let mut decreasing = !low.is_empty();
    for &j in &low {
        for i in 1..sides.len() {
            let (a, b) = (m_star[i - 1][j], m_star[i][j]);
            decreasing &= b.mean <= a.mean + 3.0 * a.combined(&b);
        }
        decreasing &= m_star[sides.len() - 1][j].mean < m_star[0][j].mean;
    }
    // steepest rise between neighbouring grid points
    let slope = |c: &[Estimate]| -> (f64, f64) {
        (1..c.len())
            .map(|j| {
                let d = betas[j] - betas[j - 1];
                ((c[j].mean - c[j - 1].mean) / d, c[j].combined(&c[j - 1]) / d)
            })
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    };
    let slopes: Vec<(f64, f64)> = m_star.iter().map(|c| slope(c)).collect();
    let mut sharpening = slopes[slopes.len() - 1].0 > slopes[0].0;
    for w in slopes.windows(2) {
        sharpening &= w[0].0 <= w[1].0 + 3.0 * w[0].1.hypot(w[1].1);
    }
    let small = m_tilde.iter().all(|m| m.mean < 0.02);
    for (i, &l) in sides.iter().enumerate() {
        let curve: Vec<String> = m_star[i].iter().map(|e| format!("{:.3}", e.mean)).collect();
        notes.push(format!(
            "L={l}: m* [{}], max slope {:.1} +/- {:.1}, M~ at beta={:.2}: {}",
            curve.join(" "),
            slopes[i].0,
            slopes[i].1,
            betas[0],
            show(&m_tilde[i])
        ));
    }
    Ok(Outcome::new(
        decreasing && sharpening && small,
        format!(
            "decreasing with L below the transition: {decreasing} (grid points {:?}); sharpening: {sharpening}; \
             M~ < 0.02 at the low end: {small}; {}",
            low.iter().map(|&j| betas[j]).collect::<Vec<_>>(),
            notes.join("; ")
        ),
    ))
}

fn transience_verdicts() -> Result<Outcome> {
    // exponent s of E(p) ~ |p|^s near 0 from the oracle energies
    let nn = {
        let e = |q: f64| 2.0 * (1.0 - q.cos());
        (e(2e-3) / e(1e-3)).log2()
    };
    let pl = |alpha: f64| -> f64 {
        let e = |q: f64| oracle::power_law_energy_1d(alpha, q, 2_000_000);
        (e(2e-3) / e(1e-3)).log2()
    };
    let cases: Vec<(String, Model, usize, f64, Vec<Transience>)> = vec![
        ("d=3 NN".into(), Model::nearest_neighbor(3), 3, nn, vec![Transience::Transient]),
        ("d=2 NN".into(), Model::nearest_neighbor(2), 2, nn, vec![Transience::Recurrent]),
        ("d=1 alpha=1.5".into(), Model::power_law(1, 1.5)?, 1, pl(1.5), vec![Transience::Transient]),
        (
            "d=1 alpha=2".into(),
            Model::power_law(1, 2.0)?,
            1,
            pl(2.0),
            vec![Transience::Borderline, Transience::Recurrent],
        ),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (name, model, d, s, allowed) in cases {
        let rep = transience_classify(&model)?;
        // int dp / |p|^s over a d-dimensional ball is finite iff s < d
        let oracle_verdict = if s < d as f64 - 0.05 { Transience::Transient } else { Transience::Recurrent };
        let energy_ok = if d == 1 {
            let q = 0.01;
            let reference = oracle::power_law_energy_1d(if name.contains("1.5") { 1.5 } else { 2.0 }, q, 2_000_000);
            (model.energy(&[q]) - reference).abs() < 1e-6 * reference
        } else {
            true
        };
        let ok = allowed.contains(&rep.verdict) && allowed.contains(&oracle_verdict) && energy_ok;
        all &= ok;
        parts.push(format!("{name}: {} (s = {:.3}, oracle s = {s:.3})", rep.verdict, rep.exponent));
    }
    Ok(Outcome::new(all, parts.join("; ")))
}

fn uniqueness_diagnostic() -> Result<Outcome> {
    let model = Model::nearest_neighbor(2);
    let region = Region::lattice_box(&model, 32, Boundary::Plus)?;
    let cfg = ChainConfig::new(0.6, Boundary::Plus, 11_000, 10).with_burn_in(1000);
    let labeler = Labeler::new(&region);
    let mut est = UniquenessEstimator::new(&region, 0.05, cfg.measurements())?;
    let g = Graph::of(&region);
    let boundary = region.boundary_vertices();
    let threshold = (0.05 * g.n as f64).ceil() as usize;
    let mut hits = 0u64;
    let mut samples = 0u64;
    sample_duplicated(&region, &cfg, |open| {
        est.observe(&labeler.label(open));
        // independent count: boundary-touching clusters of size >= 5% |box|
        let mut claimed = vec![false; g.n];
        let mut big = 0;
        for &b in &boundary {
            if claimed[b] {
                continue;
            }
            let (cluster, _) = oracle::open_cluster(&g, &open.0, b);
            let size = cluster.iter().filter(|&&c| c).count();
            cluster.iter().enumerate().filter(|p| *p.1).for_each(|(v, _)| claimed[v] = true);
            big += usize::from(size >= threshold);
        }
        hits += u64::from(big >= 2);
        samples += 1;
    })?;
    let freq = est.finish()?;
    let direct = hits as f64 / samples as f64;
    Ok(Outcome::new(
        samples >= 10_000 && agree(freq.mean, direct) && freq.mean < 0.01,
        format!(
            "finite-volume proxy: {samples} samples, frequency of two large boundary clusters {} (recount {direct:.4})",
            show(&freq)
        ),
    ))
}

fn order_parameter_inequalities() -> Result<Outcome> {
    let model = Model::nearest_neighbor(2);
    let mut all = true;
    let mut parts = Vec::new();
    for (k, beta) in [0.3, 0.6].into_iter().enumerate() {
        let cfg = ChainConfig::new(beta, Boundary::Plus, 44_000, 50 + k as u64).with_burn_in(4000);
        let rep = order_parameters(&model, 32, &cfg, &OrderParameterOptions::default())?;
        let lower = InequalityCheck::new("M~ <= M", rep.m_tilde, rep.m_lro);
        let upper = InequalityCheck::new("M <= m*", rep.m_lro, rep.m_star);
        all &= lower.holds && upper.holds;
        parts.push(format!(
            "beta={beta}: M~ {}, M_LRO {}, m* {} -> M~ <= M_LRO {}, M_LRO <= m* {}",
            show(&rep.m_tilde),
            show(&rep.m_lro),
            show(&rep.m_star),
            lower.holds,
            upper.holds
        ));
    }
    Ok(Outcome::new(all, parts.join("; ")))
}

fn sampler_correctness() -> Result<Outcome> {
    let beta = 0.6;
    let mut all = true;
    let mut worst_seeds = 0;
    let mut graphs = 0;
    let mut independent_min_p = 1.0f64;
    for g in small_graphs().into_iter().filter(|g| g.num_edges() <= 6) {
        graphs += 1;
        let region = g.region()?;
        let law = oracle::even_subgraph_law(&Graph::of(&region), beta);
        let mut failing = 0;
        for seed in 0..20 {
            let chi = chi_square_validate(&region, beta, 5000, seed)?;
            all &= chi.cells == law.len();
            failing += usize::from(chi.p_value <= 1e-3 || chi.p_value.is_nan());
        }
        worst_seeds = worst_seeds.max(failing);
        all &= failing <= 1;

        // the same test with the exact law computed here and closed
        // configurations taken from a full run
        let cfg = ChainConfig::new(beta, region.boundary(), 25_000, 77).with_burn_in(5000).with_thinning(4);
        let mut counts = vec![0u64; law.len()];
        let mut stray = false;
        worm_run(&region, &cfg, &[], |p| match law.iter().position(|c| c.0 == p.to_mask()) {
            Some(i) => counts[i] += 1,
            None => stray = true,
        })?;
        let probs: Vec<f64> = law.iter().map(|c| c.1).collect();
        let p = chi_square(&counts, &probs).p_value;
        independent_min_p = independent_min_p.min(p);
        all &= !stray && p > 1e-3;
    }

    // fixed seed, fixed output
    let region = small_graphs()[6].region()?;
    let cfg = ChainConfig::new(beta, Boundary::Free, 3000, 5);
    let obs = [Observable::corr(0, 2), Observable::corr(1, 3)];
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    let a = worm_run(&region, &cfg, &obs, |p| ta.push(p.to_mask()))?;
    let b = worm_run(&region, &cfg, &obs, |p| tb.push(p.to_mask()))?;
    let bits = |r: &ising_currents::sampler::WormRun| {
        r.series.entries.iter().map(|e| (e.estimate.mean.to_bits(), e.estimate.stderr.to_bits())).collect::<Vec<_>>()
    };
    let mut exact = ta == tb && bits(&a) == bits(&b);
    let plus = Region::lattice_box(&Model::nearest_neighbor(2), 3, Boundary::Plus)?;
    let dcfg = ChainConfig::new(beta, Boundary::Plus, 500, 9);
    let mut da = Vec::new();
    let mut db = Vec::new();
    sample_duplicated(&plus, &dcfg, |o| da.push(o.0.clone()))?;
    sample_duplicated(&plus, &dcfg, |o| db.push(o.0.clone()))?;
    exact &= da == db;
    let scfg = dcfg.clone().with_algorithm(Algorithm::SpinWolff);
    let sa = spin_mc_run(&plus, &scfg, &[Observable::mag(0)])?.series.entries[0].estimate;
    let sb = spin_mc_run(&plus, &scfg, &[Observable::mag(0)])?.series.entries[0].estimate;
    exact &= sa.mean.to_bits() == sb.mean.to_bits() && sa.stderr.to_bits() == sb.stderr.to_bits();
    Ok(Outcome::new(
        all && exact,
        format!(
            "{graphs} corpus graphs x 20 seeds, at most {worst_seeds} failing seed(s) per graph; \
             independent fit min p {independent_min_p:.3}; bit-exact reruns: {exact}"
        ),
    ))
}

type Check = fn() -> Result<Outcome>;

const CHECKS: [(&str, u64, Check); 12] = [
    ("representation_equivalence", 30, representation_equivalence),
    ("switching_identity", 120, switching_identity),
    ("product_identity", 300, product_identity),
    ("gamma_sandwich", 120, gamma_sandwich),
    ("parity_event_formula", 60, parity_event_formula),
    ("infrared_bound", 600, infrared_bound),
    ("magnetization_2d", 900, magnetization_2d),
    ("continuity_scan", 7200, continuity_scan),
    ("transience_verdicts", 60, transience_verdicts),
    ("uniqueness_diagnostic", 600, uniqueness_diagnostic),
    ("order_parameter_inequalities", 1200, order_parameter_inequalities),
    ("sampler_correctness", 300, sampler_correctness),
];

fn main() {
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    let mut ran = 0;
    for (name, budget, check) in CHECKS {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let passed = outcome.passed && in_time;
        failed += usize::from(!passed);
        println!(
            "{} {name} ({:.1} s of {budget} s{}): {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" },
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
