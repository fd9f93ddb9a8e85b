//! Analytic dressing of parity configurations and duplicated free/plus pairs.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cluster_even::ClusterEvenChain;
use super::worm::{Worm, WormMode};
use super::{Algorithm, ChainConfig};
use crate::currents::{Current, OpenConfig, ParityConfig};
use crate::error::{Error, Result};
use crate::region::Region;
use crate::rng::{chain_rng, FREE_CHAIN, PLUS_CHAIN};

const DRESS_FREE: u64 = 2;
const DRESS_PLUS: u64 = 3;

/// Odd edges are open; an even edge is open with probability `1 - 1/cosh(beta J)`,
/// the chance that a Poisson(beta J) variable conditioned to be even is nonzero.
pub fn dress_open<R: Rng>(parity: &ParityConfig, region: &Region<f64>, beta: f64, rng: &mut R) -> OpenConfig {
    OpenConfig(
        region
            .all_edges()
            .zip(&parity.0)
            .map(|(e, &odd)| odd || rng.random::<f64>() >= 1.0 / (beta * e.coupling).cosh())
            .collect(),
    )
}

/// Integer multiplicities with the given parities: independent Poisson(beta J)
/// variables conditioned on parity, drawn by inversion.
pub fn sample_current<R: Rng>(
    parity: &ParityConfig,
    region: Arc<Region<f64>>,
    beta: f64,
    rng: &mut R,
) -> Result<Current<f64>> {
    if parity.0.len() != region.num_edges() {
        return Err(Error::Domain("parity configuration does not match the region".into()));
    }
    let mut dense = Vec::with_capacity(parity.0.len());
    for (e, &odd) in region.all_edges().zip(&parity.0) {
        let lambda = beta * e.coupling;
        let (mut k, mut term) = if odd { (1u32, lambda) } else { (0u32, 1.0) };
        if odd && lambda <= 0.0 {
            return Err(Error::Domain(format!("odd parity on an edge with beta J = {lambda}")));
        }
        let norm = if odd { lambda.sinh() } else { lambda.cosh() };
        let mut u = rng.random::<f64>() * norm;
        while u > term && term > 0.0 {
            u -= term;
            term *= lambda * lambda / f64::from((k + 1) * (k + 2));
            k += 2;
        }
        dense.push(k);
    }
    Ok(Current::from_dense(region, &dense))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicatedRun {
    pub samples: u64,
    pub algorithm: Algorithm,
    /// Closed visits between samples of the free and plus worms.
    pub strides: Option<(u64, u64)>,
}

enum Source {
    Worm { worm: Worm, stride: u64 },
    Cluster { chain: ClusterEvenChain, thinning: u64 },
}

impl Source {
    fn new(region: &Region<f64>, cfg: &ChainConfig, chain: u64) -> Result<Self> {
        match cfg.algorithm {
            Algorithm::Worm => {
                let mut worm = Worm::new(region, cfg.beta, WormMode::Relocating, chain_rng(cfg.seed, chain), &[])?;
                let slots = worm.targets().max(1) as u64;
                for _ in 0..cfg.burn_in * slots {
                    worm.step();
                }
                let stride = if cfg.burn_in > 0 {
                    let per_sweep = worm.closed_visits() as f64 / cfg.burn_in as f64;
                    ((per_sweep * cfg.thinning as f64).round() as u64).max(1)
                } else {
                    cfg.thinning
                };
                Ok(Self::Worm { worm, stride })
            }
            Algorithm::ClusterEven => {
                let mut chain = ClusterEvenChain::new(region, cfg.beta, cfg.seed, chain)?;
                for _ in 0..cfg.burn_in {
                    chain.sweep();
                }
                Ok(Self::Cluster {
                    chain,
                    thinning: cfg.thinning,
                })
            }
            a => Err(Error::Config(format!("duplicated sampling needs worm or cluster-even, not {a}"))),
        }
    }

    fn next(&mut self) -> &ParityConfig {
        match self {
            Self::Worm { worm, stride } => worm.next_closed(*stride),
            Self::Cluster { chain, thinning } => {
                for _ in 1..*thinning {
                    chain.sweep();
                }
                chain.next_config()
            }
        }
    }

    fn stride(&self) -> Option<u64> {
        match self {
            Self::Worm { stride, .. } => Some(*stride),
            Self::Cluster { .. } => None,
        }
    }
}

/// Duplicated configurations `hat(n1 + n2)` for a free current `n1` on the
/// lattice edges of `region` and an independent plus current `n2` on all of
/// its edges. Output is indexed like `region.all_edges()`: lattice edges are
/// the union, ghost edges come from `n2` alone. `cfg.measurements()` samples
/// are passed to `on_sample`.
pub fn sample_duplicated(
    region: &Region<f64>,
    cfg: &ChainConfig,
    mut on_sample: impl FnMut(&OpenConfig),
) -> Result<DuplicatedRun> {
    cfg.validate()?;
    let free = region.free_view();
    let mut a = Source::new(&free, cfg, FREE_CHAIN)?;
    let mut b = Source::new(region, cfg, PLUS_CHAIN)?;
    let mut ra = chain_rng(cfg.seed, DRESS_FREE);
    let mut rb = chain_rng(cfg.seed, DRESS_PLUS);
    let lattice = region.lattice_edges().len();
    let samples = cfg.measurements();
    for _ in 0..samples {
        let oa = dress_open(a.next(), &free, cfg.beta, &mut ra);
        let mut ob = dress_open(b.next(), region, cfg.beta, &mut rb);
        for (o, &x) in ob.0[..lattice].iter_mut().zip(&oa.0) {
            *o |= x;
        }
        on_sample(&ob);
    }
    Ok(DuplicatedRun {
        samples,
        algorithm: cfg.algorithm,
        strides: a.stride().zip(b.stride()),
    })
}
