//! Worm chain on parity configurations with at most one defect pair.
//!
//! The extended state is `(odd edges, tail, head)` with `d(odd) = {tail} + {head}`
//! and weight `prod_{odd} tanh(beta J)`. Moving an end across an incident edge
//! is proposed from an alias table over `tanh(beta J)` and accepted with the
//! Metropolis-Hastings ratio; a closed worm may relocate to a uniform slot.
//! Pair visit counts are then proportional to `Z_xy`, and closed visits to
//! `(#slots) Z_0`.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{live_components, Algorithm, ChainConfig, EstimateSeries, Observable, ObservableEstimate, PROPOSAL_CUTOFF};
use crate::currents::ParityConfig;
use crate::error::{too_large, Error, Result};
use crate::exact::ParitySystem;
use crate::region::{Boundary, Region, GHOST};
use crate::rng::{chain_rng, FREE_CHAIN, PLUS_CHAIN};
use crate::stats::{chi_square, jackknife_ratio, ChiSquare, Estimate};

const RELOCATE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WormMode {
    /// Both ends move; a closed worm jumps to a uniform slot.
    Relocating,
    /// The tail stays at the given vertex (or `GHOST`); only the head moves.
    Pinned(u32),
}

/// Snapshot of a worm chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WormState {
    pub parity: ParityConfig,
    /// `(tail, head)` when open; `None` when closed.
    pub defect: Option<(u32, u32)>,
    pub steps: u64,
    pub closed_visits: u64,
}

/// Visit counts `count[x][y]` for watched slots `x`, over all slots `y`.
#[derive(Debug, Clone)]
struct Occupation {
    slots: usize,
    row_of: Vec<u32>,
    counts: Vec<u64>,
}

impl Occupation {
    fn new(slots: usize, watched: &[usize]) -> Self {
        let mut row_of = vec![u32::MAX; slots];
        let mut rows = 0u32;
        for &w in watched {
            if row_of[w] == u32::MAX {
                row_of[w] = rows;
                rows += 1;
            }
        }
        Self {
            slots,
            row_of,
            counts: vec![0; rows as usize * slots],
        }
    }

    #[inline]
    fn record(&mut self, tail: usize, head: usize) {
        let r = self.row_of[tail];
        if r != u32::MAX {
            self.counts[r as usize * self.slots + head] += 1;
        }
        if head != tail {
            let r = self.row_of[head];
            if r != u32::MAX {
                self.counts[r as usize * self.slots + tail] += 1;
            }
        }
    }

    fn get(&self, x: usize, y: usize) -> Option<u64> {
        let r = self.row_of[x];
        (r != u32::MAX).then(|| self.counts[r as usize * self.slots + y])
    }
}

pub struct Worm {
    n: usize,
    /// Relocation targets: the vertices, plus the ghost when present.
    targets: usize,
    incident: Vec<Vec<(u32, u32)>>,
    alias: Vec<Option<WeightedAliasIndex<f64>>>,
    total: Vec<f64>,
    tanh: Vec<f64>,
    odd: ParityConfig,
    tail: usize,
    head: usize,
    mode: WormMode,
    rng: ChaCha8Rng,
    occupation: Occupation,
    steps: u64,
    closed_visits: u64,
    accepted: u64,
}

impl Worm {
    /// A closed worm with no odd edges. `watched` lists the slots whose
    /// pair occupations are recorded.
    pub fn new(region: &Region<f64>, beta: f64, mode: WormMode, rng: ChaCha8Rng, watched: &[u32]) -> Result<Self> {
        if region.field() != 0.0 {
            return Err(Error::Unsupported("the worm samples currents, which carry no external field".into()));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Domain(format!("beta must be finite and >= 0, got {beta}")));
        }
        let n = region.num_vertices();
        let slots = n + 1;
        let mut incident: Vec<Vec<(u32, u32)>> = vec![Vec::new(); slots];
        let mut weights: Vec<Vec<f64>> = vec![Vec::new(); slots];
        let mut tanh = Vec::with_capacity(region.num_edges());
        for (i, e) in region.all_edges().enumerate() {
            let lambda = beta * e.coupling;
            let t = lambda.tanh();
            tanh.push(t);
            if lambda > PROPOSAL_CUTOFF {
                let (u, v) = (e.u as usize, region.slot(e.v));
                incident[u].push((v as u32, i as u32));
                incident[v].push((u as u32, i as u32));
                weights[u].push(t);
                weights[v].push(t);
            }
        }
        let total: Vec<f64> = weights.iter().map(|w| w.iter().sum()).collect();
        let alias = weights
            .into_iter()
            .map(|w| {
                if w.is_empty() {
                    Ok(None)
                } else {
                    WeightedAliasIndex::new(w)
                        .map(Some)
                        .map_err(|e| Error::Domain(format!("alias table: {e}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let start = match mode {
            WormMode::Relocating => 0,
            WormMode::Pinned(v) => {
                if v != GHOST && v as usize >= n || v == GHOST && !region.has_ghost() {
                    return Err(Error::Domain(format!("cannot pin the worm at {v}")));
                }
                region.slot(v)
            }
        };
        let watched: Vec<usize> = watched
            .iter()
            .map(|&v| {
                if v == GHOST || (v as usize) < n {
                    Ok(region.slot(v))
                } else {
                    Err(Error::Domain(format!("vertex {v} outside the region")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            targets: n + usize::from(region.has_ghost()),
            incident,
            alias,
            total,
            tanh,
            odd: ParityConfig::all_even(region.num_edges()),
            tail: start,
            head: start,
            mode,
            rng,
            occupation: Occupation::new(slots, &watched),
            steps: 0,
            closed_visits: 0,
            accepted: 0,
        })
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.tail == self.head
    }

    pub fn parity(&self) -> &ParityConfig {
        &self.odd
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn closed_visits(&self) -> u64 {
        self.closed_visits
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.steps.max(1) as f64
    }

    /// Relocation targets (the normalization of relocating pair estimates).
    pub fn targets(&self) -> usize {
        self.targets
    }

    fn vertex(&self, slot: usize) -> u32 {
        if slot == self.n {
            GHOST
        } else {
            slot as u32
        }
    }

    pub fn state(&self) -> WormState {
        WormState {
            parity: self.odd.clone(),
            defect: (!self.is_closed()).then(|| (self.vertex(self.tail), self.vertex(self.head))),
            steps: self.steps,
            closed_visits: self.closed_visits,
        }
    }

    /// One move, then the occupation of the resulting state is recorded.
    /// Returns whether the worm is closed.
    pub fn step(&mut self) -> bool {
        self.steps += 1;
        let r: f64 = self.rng.random();
        let relocating = matches!(self.mode, WormMode::Relocating);
        if relocating && r < RELOCATE {
            if self.is_closed() {
                let v = self.rng.random_range(0..self.targets);
                self.tail = v;
                self.head = v;
                self.accepted += 1;
            }
        } else {
            let move_head = !relocating || r < RELOCATE + 0.5 * (1.0 - RELOCATE);
            let b = if move_head { self.head } else { self.tail };
            if let Some(alias) = &self.alias[b] {
                let (w, e) = self.incident[b][alias.sample(&mut self.rng)];
                let (w, e) = (w as usize, e as usize);
                let t = self.tanh[e];
                let flip = if self.odd.0[e] { 1.0 / t } else { t };
                let ratio = flip * self.total[b] / self.total[w];
                if ratio >= 1.0 || self.rng.random::<f64>() < ratio {
                    self.odd.0[e] ^= true;
                    if move_head {
                        self.head = w;
                    } else {
                        self.tail = w;
                    }
                    self.accepted += 1;
                }
            }
        }
        self.occupation.record(self.tail, self.head);
        let closed = self.is_closed();
        if closed {
            self.closed_visits += 1;
        }
        closed
    }

    /// Steps until `stride` further closed visits have occurred.
    pub fn next_closed(&mut self, stride: u64) -> &ParityConfig {
        let mut seen = 0;
        while seen < stride {
            if self.step() {
                seen += 1;
            }
        }
        &self.odd
    }

    /// Raw occupation count of the pair `(x, y)` (watched `x`).
    pub fn pair_count(&self, x: u32, y: u32) -> Option<u64> {
        let (sx, sy) = (self.slot(x), self.slot(y));
        self.occupation.get(sx, sy).or_else(|| self.occupation.get(sy, sx))
    }

    fn slot(&self, v: u32) -> usize {
        if v == GHOST {
            self.n
        } else {
            v as usize
        }
    }

    /// Numerator and denominator of the `<s_x s_y>` estimator as plain
    /// counts, scaled so that `num / den` is the estimate.
    fn ratio_terms(&self, x: u32, y: u32) -> Result<(f64, f64)> {
        match self.mode {
            WormMode::Relocating => {
                let c = self
                    .pair_count(x, y)
                    .ok_or_else(|| Error::Domain(format!("pair ({x},{y}) is not watched")))?;
                if x == y {
                    Ok((1.0, 1.0))
                } else {
                    Ok((c as f64 * self.targets as f64 / 2.0, self.closed_visits as f64))
                }
            }
            WormMode::Pinned(a) => {
                let other = if x == a {
                    y
                } else if y == a {
                    x
                } else {
                    return Err(Error::Domain(format!("pinned worm at {a} cannot estimate ({x},{y})")));
                };
                if other == a {
                    return Ok((1.0, 1.0));
                }
                let c = self
                    .occupation
                    .get(self.slot(a), self.slot(other))
                    .ok_or_else(|| Error::Domain(format!("vertex {a} is not watched")))?;
                Ok((c as f64, self.closed_visits as f64))
            }
        }
    }

    /// Current estimate of `<s_x s_y>` from the cumulative histogram.
    pub fn pair_estimate(&self, x: u32, y: u32) -> Result<f64> {
        let (num, den) = self.ratio_terms(x, y)?;
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }
}

#[derive(Debug, Clone)]
pub struct WormRun {
    pub series: EstimateSeries,
    pub state: WormState,
    pub closed_samples: u64,
    /// Closed visits between emitted samples.
    pub stride: u64,
    pub acceptance: f64,
}

/// Relocating worm run; see [`worm_run_with`].
pub fn worm_run(
    region: &Region<f64>,
    cfg: &ChainConfig,
    observables: &[Observable],
    on_closed: impl FnMut(&ParityConfig),
) -> Result<WormRun> {
    worm_run_with(region, cfg, WormMode::Relocating, observables, on_closed)
}

/// Runs `cfg.sweeps` sweeps of `#slots` moves each. After burn-in every
/// move feeds the pair histogram (jackknifed over bins of sweeps) and every
/// `stride`-th closed visit is passed to `on_closed`, with `stride` fixed at
/// the end of burn-in so that about one sample is emitted per `thinning` sweeps.
pub fn worm_run_with(
    region: &Region<f64>,
    cfg: &ChainConfig,
    mode: WormMode,
    observables: &[Observable],
    mut on_closed: impl FnMut(&ParityConfig),
) -> Result<WormRun> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Worm {
        return Err(Error::Config(format!("worm_run called with algorithm {}", cfg.algorithm)));
    }
    if cfg.boundary != region.boundary() {
        return Err(Error::Config(format!(
            "config boundary {} does not match the region ({})",
            cfg.boundary,
            region.boundary()
        )));
    }
    let n = region.num_vertices();
    for o in observables {
        if o.x as usize >= n || o.y.is_some_and(|y| y != GHOST && y as usize >= n) {
            return Err(Error::Domain(format!("observable {o:?} outside the region")));
        }
    }
    let chain = if region.boundary() == Boundary::Plus { PLUS_CHAIN } else { FREE_CHAIN };
    let mut watched: Vec<u32> = observables
        .iter()
        .flat_map(|o| [o.x, o.partner()])
        .filter(|&v| v != GHOST || region.has_ghost())
        .collect();
    if let WormMode::Pinned(a) = mode {
        watched.push(a);
    }
    let mut worm = Worm::new(region, cfg.beta, mode, chain_rng(cfg.seed, chain), &watched)?;
    let slots = worm.targets.max(1) as u64;

    for _ in 0..cfg.burn_in * slots {
        worm.step();
    }
    let stride = if cfg.burn_in > 0 {
        let per_sweep = worm.closed_visits as f64 / cfg.burn_in as f64;
        ((per_sweep * cfg.thinning as f64).round() as u64).max(1)
    } else {
        cfg.thinning
    };

    let measured = cfg.sweeps - cfg.burn_in;
    let bins = (measured as usize).min(crate::stats::DEFAULT_BINS);
    let estimable: Vec<Option<(u32, u32)>> = observables
        .iter()
        .map(|o| (o.partner() != GHOST || region.has_ghost()).then(|| (o.x, o.partner())))
        .collect();
    let snapshot = |w: &Worm| -> Result<Vec<(f64, f64)>> {
        estimable
            .iter()
            .map(|p| match p {
                Some((x, y)) => w.ratio_terms(*x, *y),
                None => Ok((0.0, 1.0)),
            })
            .collect()
    };
    let mut last = snapshot(&worm)?;
    let mut per_bin: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(bins); observables.len()];
    let mut closed_samples = 0u64;
    let mut since = 0u64;
    let mut bin = 0usize;
    for s in 0..measured {
        for _ in 0..slots {
            if worm.step() {
                since += 1;
                if since == stride {
                    since = 0;
                    closed_samples += 1;
                    on_closed(&worm.odd);
                }
            }
        }
        let target = ((s + 1) as u128 * bins as u128 / measured as u128) as usize;
        if target > bin {
            bin = target;
            let now = snapshot(&worm)?;
            for (i, (a, b)) in now.iter().zip(&last).enumerate() {
                per_bin[i].push((a.0 - b.0, a.1 - b.1));
            }
            last = now;
        }
    }

    let components = live_components(region, cfg.beta);
    let mut series = EstimateSeries::new(region, cfg, Algorithm::Worm);
    if (0..n).any(|v| worm.incident[v].is_empty()) {
        series.ergodic = false;
        series.notes.push("isolated vertices: no positive couplings reach them".into());
    }
    for (i, o) in observables.iter().enumerate() {
        let (x, y) = (o.x, o.partner());
        let estimate = if estimable[i].is_none() {
            // free boundary, no field: the one-point function vanishes by symmetry
            Estimate::exact(0.0, worm.steps)
        } else if x == y {
            Estimate::exact(1.0, worm.steps)
        } else if components[region.slot(x)] != components[region.slot(y)] {
            Estimate {
                mean: 0.0,
                stderr: f64::INFINITY,
                n: worm.steps,
            }
        } else {
            let (num, den): (Vec<f64>, Vec<f64>) = per_bin[i].iter().copied().unzip();
            let mut e = jackknife_ratio(&num, &den);
            e.n = den.iter().sum::<f64>() as u64;
            if !e.mean.is_finite() {
                e = Estimate {
                    mean: 0.0,
                    stderr: f64::INFINITY,
                    n: 0,
                };
            }
            e
        };
        series.entries.push(ObservableEstimate {
            observable: *o,
            estimate,
        });
    }
    Ok(WormRun {
        series,
        state: worm.state(),
        closed_samples,
        stride,
        acceptance: worm.acceptance(),
    })
}

/// Goodness of fit of the closed configurations visited by a relocating
/// worm against the exact law `prod_{odd} tanh(beta J)` over even subgraphs.
/// `samples` closed configurations are drawn, `stride` closed visits apart.
pub fn chi_square_validate(region: &Region<f64>, beta: f64, samples: u64, seed: u64) -> Result<ChiSquare> {
    chi_square_validate_with(region, beta, samples, seed, 20)
}

pub fn chi_square_validate_with(
    region: &Region<f64>,
    beta: f64,
    samples: u64,
    seed: u64,
    stride: u64,
) -> Result<ChiSquare> {
    too_large("chi-square edges", region.num_edges(), 6)?;
    let system = ParitySystem::new(region, beta, &[])?;
    let patterns = system.patterns(0);
    let index: std::collections::HashMap<u64, usize> =
        patterns.iter().enumerate().map(|(i, (m, _))| (*m, i)).collect();
    let probs: Vec<f64> = patterns.iter().map(|p| p.1).collect();
    let mut rng = chain_rng(seed, FREE_CHAIN);
    // decorrelate seeds that differ in few bits
    let _ = rng.next_u64();
    let mut worm = Worm::new(region, beta, WormMode::Relocating, rng, &[])?;
    for _ in 0..100 * (worm.targets as u64 + region.num_edges() as u64) {
        worm.step();
    }
    let mut observed = vec![0u64; patterns.len()];
    for _ in 0..samples {
        let mask = worm.next_closed(stride).to_mask();
        match index.get(&mask) {
            Some(&i) => observed[i] += 1,
            None => return Err(Error::Domain(format!("worm produced a non-even closed configuration {mask:#b}"))),
        }
    }
    Ok(chi_square(&observed, &probs))
}
