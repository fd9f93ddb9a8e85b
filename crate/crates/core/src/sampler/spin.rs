//! Spin-model Markov chains sampling the Gibbs measure directly.
//!
//! Spins live on `num_vertices` slots plus, under plus boundary conditions,
//! a ghost slot. Metropolis keeps the ghost at `+1`. The cluster updates
//! treat it as an ordinary spin and flip every spin afterwards if it ended
//! at `-1`, which is exact because without a field the weight is even.

use petgraph::unionfind::UnionFind;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Algorithm, ChainConfig, EstimateSeries, Observable, ObservableEstimate};
use crate::error::{Error, Result};
use crate::region::{Boundary, Region, GHOST};
use crate::rng::{chain_rng, FREE_CHAIN, PLUS_CHAIN};
use crate::stats::Binner;

pub struct SpinChain {
    n: usize,
    ghost: bool,
    sigma: Vec<i8>,
    /// Per slot: `(neighbour slot, beta J)`.
    nbrs: Vec<Vec<(u32, f64)>>,
    /// Per edge: `(u slot, v slot, 1 - exp(-2 beta J))`.
    edges: Vec<(u32, u32, f64)>,
    field: f64,
    rng: ChaCha8Rng,
    stack: Vec<u32>,
    mark: Vec<bool>,
    wolff_flips: usize,
}

impl SpinChain {
    /// All spins `+1`.
    pub fn new(region: &Region<f64>, beta: f64, rng: ChaCha8Rng) -> Self {
        let n = region.num_vertices();
        let ghost = region.has_ghost();
        let slots = n + usize::from(ghost);
        let mut nbrs = vec![Vec::new(); slots];
        let mut edges = Vec::with_capacity(region.num_edges());
        for e in region.all_edges() {
            let lambda = beta * e.coupling;
            let (u, v) = (e.u, region.slot(e.v) as u32);
            nbrs[u as usize].push((v, lambda));
            nbrs[v as usize].push((u, lambda));
            edges.push((u, v, -(-2.0 * lambda).exp_m1()));
        }
        Self {
            n,
            ghost,
            sigma: vec![1; slots],
            nbrs,
            edges,
            field: beta * region.field(),
            rng,
            stack: Vec::new(),
            mark: vec![false; slots],
            wolff_flips: 1,
        }
    }

    /// Spins by slot; the ghost (if any) is last and equals `+1`.
    pub fn spins(&self) -> &[i8] {
        &self.sigma
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn metropolis_sweep(&mut self) {
        for _ in 0..self.n {
            let x = self.rng.random_range(0..self.n);
            let local: f64 = self.field
                + self.nbrs[x]
                    .iter()
                    .map(|&(y, l)| l * f64::from(self.sigma[y as usize]))
                    .sum::<f64>();
            let de = 2.0 * f64::from(self.sigma[x]) * local;
            if de <= 0.0 || self.rng.random::<f64>() < (-de).exp() {
                self.sigma[x] = -self.sigma[x];
            }
        }
    }

    fn normalize_ghost(&mut self) {
        if self.ghost && self.sigma[self.n] < 0 {
            for s in &mut self.sigma {
                *s = -*s;
            }
        }
    }

    /// One Wolff cluster flip; returns the cluster size.
    pub fn wolff_update(&mut self) -> usize {
        let slots = self.sigma.len();
        let seed = self.rng.random_range(0..slots);
        let s = self.sigma[seed];
        self.stack.clear();
        self.stack.push(seed as u32);
        self.sigma[seed] = -s;
        let mut size = 1;
        while let Some(x) = self.stack.pop() {
            for i in 0..self.nbrs[x as usize].len() {
                let (y, l) = self.nbrs[x as usize][i];
                if self.sigma[y as usize] == s && self.rng.random::<f64>() < -(-2.0 * l).exp_m1() {
                    self.sigma[y as usize] = -s;
                    self.stack.push(y);
                    size += 1;
                }
            }
        }
        self.normalize_ghost();
        size
    }

    /// A fixed number of Wolff flips, set by [`Self::calibrate_wolff`] to
    /// touch about `#slots` spins. The count must not depend on the state
    /// during measurement, or the chain is biased.
    pub fn wolff_sweep(&mut self) {
        for _ in 0..self.wolff_flips {
            self.wolff_update();
        }
    }

    /// Runs `sweeps` adaptive sweeps (flipping until `#slots` spins were
    /// touched) and fixes the flips per sweep from the mean cluster size.
    pub fn calibrate_wolff(&mut self, sweeps: u64) {
        let (mut flips, mut touched) = (0u64, 0u64);
        for _ in 0..sweeps {
            let mut t = 0;
            while t < self.sigma.len() {
                t += self.wolff_update();
                flips += 1;
            }
            touched += t as u64;
        }
        if flips > 0 {
            let mean = touched as f64 / flips as f64;
            self.wolff_flips = ((self.sigma.len() as f64 / mean).round() as usize).max(1);
        }
    }

    /// One Swendsen-Wang update. The occupied bonds (indexed like
    /// `region.all_edges()`) are written to `bonds`.
    pub fn sw_sweep(&mut self, bonds: &mut Vec<bool>) {
        let slots = self.sigma.len();
        bonds.clear();
        bonds.resize(self.edges.len(), false);
        let mut uf = UnionFind::<u32>::new(slots);
        for (i, &(u, v, p)) in self.edges.iter().enumerate() {
            if self.sigma[u as usize] == self.sigma[v as usize] && self.rng.random::<f64>() < p {
                bonds[i] = true;
                uf.union(u, v);
            }
        }
        self.mark.iter_mut().for_each(|m| *m = false);
        let mut flip = vec![false; slots];
        for x in 0..slots {
            let r = uf.find(x as u32) as usize;
            if !self.mark[r] {
                self.mark[r] = true;
                flip[r] = self.rng.random::<bool>();
            }
            if flip[r] {
                self.sigma[x] = -self.sigma[x];
            }
        }
        self.normalize_ghost();
    }

    pub fn sweep(&mut self, algorithm: Algorithm, bonds: &mut Vec<bool>) {
        match algorithm {
            Algorithm::SpinWolff => self.wolff_sweep(),
            Algorithm::SpinSw | Algorithm::ClusterEven => self.sw_sweep(bonds),
            _ => self.metropolis_sweep(),
        }
    }
}

/// The algorithm actually run: cluster updates need a field-free weight.
pub(crate) fn effective_algorithm(region: &Region<f64>, requested: Algorithm) -> (Algorithm, Option<String>) {
    match requested {
        Algorithm::SpinWolff | Algorithm::SpinSw if region.field() != 0.0 => (
            Algorithm::SpinMetropolis,
            Some(format!("{requested} refused with a nonzero field; ran spin-metropolis")),
        ),
        a => (a, None),
    }
}

/// Runs a spin chain and calls `observe` on every kept configuration
/// (`cfg.measurements()` calls). Returns the algorithm used and any note.
pub fn spin_mc_sample(
    region: &Region<f64>,
    cfg: &ChainConfig,
    mut observe: impl FnMut(&[i8]),
) -> Result<(Algorithm, Option<String>)> {
    cfg.validate()?;
    if !cfg.algorithm.is_spin() {
        return Err(Error::Config(format!("spin_mc_run called with algorithm {}", cfg.algorithm)));
    }
    let (algorithm, note) = effective_algorithm(region, cfg.algorithm);
    let chain = if region.boundary() == Boundary::Plus { PLUS_CHAIN } else { FREE_CHAIN };
    let mut spins = SpinChain::new(region, cfg.beta, chain_rng(cfg.seed, chain));
    let mut bonds = Vec::new();
    if algorithm == Algorithm::SpinWolff {
        spins.calibrate_wolff(cfg.burn_in);
    } else {
        for _ in 0..cfg.burn_in {
            spins.sweep(algorithm, &mut bonds);
        }
    }
    for _ in 0..cfg.measurements() {
        for _ in 0..cfg.thinning {
            spins.sweep(algorithm, &mut bonds);
        }
        observe(spins.spins());
    }
    Ok((algorithm, note))
}

#[derive(Debug, Clone)]
pub struct SpinRun {
    pub series: EstimateSeries,
}

/// Binned estimates of the requested one- and two-point functions.
pub fn spin_mc_run(region: &Region<f64>, cfg: &ChainConfig, observables: &[Observable]) -> Result<SpinRun> {
    let n = region.num_vertices();
    let slot = |v: u32| -> Result<Option<usize>> {
        if v == GHOST {
            Ok(region.has_ghost().then_some(n))
        } else if (v as usize) < n {
            Ok(Some(v as usize))
        } else {
            Err(Error::Domain(format!("vertex {v} outside the region")))
        }
    };
    let pairs: Vec<(usize, Option<usize>)> = observables
        .iter()
        .map(|o| Ok((slot(o.x)?.unwrap(), slot(o.partner())?)))
        .collect::<Result<_>>()?;
    let m = cfg.measurements();
    let mut binners: Vec<Binner> = observables.iter().map(|_| Binner::new(m, cfg.bins())).collect();
    let (algorithm, note) = spin_mc_sample(region, cfg, |s| {
        for ((x, y), b) in pairs.iter().zip(binners.iter_mut()) {
            // no ghost: the one-point function is the bare spin
            let sy = y.map_or(1, |y| s[y]);
            b.push(f64::from(s[*x] * sy));
        }
    })?;
    let mut series = EstimateSeries::new(region, cfg, algorithm);
    series.notes.extend(note);
    for (o, b) in observables.iter().zip(&binners) {
        series.entries.push(ObservableEstimate {
            observable: *o,
            estimate: b.estimate(),
        });
    }
    Ok(SpinRun { series })
}
