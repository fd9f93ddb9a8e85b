//! Monte Carlo samplers: the worm chain on parity configurations, spin
//! chains for cross-validation, and duplicated free/plus pairs.

mod cluster_even;
pub mod corpus;
mod duplicated;
mod spin;
mod worm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{Boundary, Region, Shape, GHOST};
use crate::stats::{Estimate, DEFAULT_BINS, MIN_BINS};

pub use cluster_even::{uniform_even_subgraph, ClusterEvenChain};
pub use duplicated::{dress_open, sample_current, sample_duplicated, DuplicatedRun};
pub use spin::{spin_mc_run, spin_mc_sample, SpinChain, SpinRun};
pub use worm::{chi_square_validate, chi_square_validate_with, worm_run, worm_run_with, Worm, WormMode, WormRun, WormState};

/// Couplings `beta J` below this are never proposed.
pub const PROPOSAL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Worm,
    /// Swendsen-Wang bonds followed by a uniform even subgraph of the bonds.
    ClusterEven,
    SpinMetropolis,
    SpinWolff,
    SpinSw,
}

impl Algorithm {
    pub fn is_spin(self) -> bool {
        matches!(self, Self::SpinMetropolis | Self::SpinWolff | Self::SpinSw)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Worm => "worm",
            Self::ClusterEven => "cluster-even",
            Self::SpinMetropolis => "spin-metropolis",
            Self::SpinWolff => "spin-wolff",
            Self::SpinSw => "spin-sw",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "worm" => Self::Worm,
            "cluster-even" => Self::ClusterEven,
            "spin-metropolis" | "metropolis" => Self::SpinMetropolis,
            "spin-wolff" | "wolff" => Self::SpinWolff,
            "spin-sw" | "sw" => Self::SpinSw,
            other => return Err(Error::Config(format!("unknown algorithm `{other}`"))),
        })
    }
}

/// Run parameters. `sweeps` counts burn-in; measurements are taken on every
/// `thinning`-th sweep after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub beta: f64,
    pub boundary: Boundary,
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub algorithm: Algorithm,
}

impl ChainConfig {
    pub fn new(beta: f64, boundary: Boundary, sweeps: u64, seed: u64) -> Self {
        Self {
            beta,
            boundary,
            sweeps,
            burn_in: sweeps / 10,
            thinning: 1,
            seed,
            algorithm: Algorithm::Worm,
        }
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_thinning(mut self, thinning: u64) -> Self {
        self.thinning = thinning;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn measurements(&self) -> u64 {
        self.sweeps.saturating_sub(self.burn_in) / self.thinning.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if self.sweeps <= self.burn_in {
            return Err(Error::Config(format!(
                "sweeps ({}) must exceed burn-in ({})",
                self.sweeps, self.burn_in
            )));
        }
        if self.thinning == 0 {
            return Err(Error::Config("thinning must be >= 1".into()));
        }
        if self.measurements() < MIN_BINS as u64 {
            return Err(Error::Config(format!(
                "{} measurements leave fewer than {MIN_BINS} bins",
                self.measurements()
            )));
        }
        Ok(())
    }

    pub(crate) fn bins(&self) -> usize {
        (self.measurements() as usize).min(DEFAULT_BINS)
    }
}

/// A two-point function `<s_x s_y>`; `y = None` is the one-point function
/// `<s_x>` (the ghost partner under plus boundary conditions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observable {
    pub x: u32,
    pub y: Option<u32>,
}

impl Observable {
    pub fn corr(x: u32, y: u32) -> Self {
        Self { x, y: Some(y) }
    }

    pub fn mag(x: u32) -> Self {
        Self { x, y: None }
    }

    pub fn name(&self) -> &'static str {
        if self.y.is_some() {
            "corr"
        } else {
            "mag"
        }
    }

    /// The partner vertex, with the ghost standing in for a magnetization.
    pub(crate) fn partner(&self) -> u32 {
        self.y.unwrap_or(GHOST)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableEstimate {
    pub observable: Observable,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSeries {
    pub entries: Vec<ObservableEstimate>,
    pub seed: u64,
    pub beta: f64,
    pub algorithm: Algorithm,
    pub region: String,
    pub half_width: Option<usize>,
    pub boundary: Boundary,
    pub ergodic: bool,
    pub notes: Vec<String>,
}

impl EstimateSeries {
    pub(crate) fn new<T>(region: &Region<T>, cfg: &ChainConfig, algorithm: Algorithm) -> Self
    where
        T: crate::num::Real,
    {
        Self {
            entries: Vec::new(),
            seed: cfg.seed,
            beta: cfg.beta,
            algorithm,
            region: region.describe(),
            half_width: match region.shape() {
                Shape::Box { half_width } => Some(half_width),
                Shape::Torus { side } => Some(side),
                Shape::Graph => None,
            },
            boundary: region.boundary(),
            ergodic: true,
            notes: Vec::new(),
        }
    }

    pub fn get(&self, observable: Observable) -> Option<Estimate> {
        self.entries
            .iter()
            .find(|e| e.observable == observable)
            .map(|e| e.estimate)
    }

    pub const CSV_HEADER: &'static str = "observable,x,y,mean,stderr,n,seed,beta,L,bc";

    /// CSV body rows (no header), numbers with 17 significant digits.
    pub fn csv_rows(&self) -> Vec<String> {
        let l = self.half_width.map(|l| l.to_string()).unwrap_or_default();
        self.entries
            .iter()
            .map(|e| {
                let y = match e.observable.y {
                    Some(GHOST) => "ghost".to_string(),
                    Some(y) => y.to_string(),
                    None => String::new(),
                };
                format!(
                    "{},{},{},{:.16e},{:.16e},{},{},{:.16e},{},{}",
                    e.observable.name(),
                    e.observable.x,
                    y,
                    e.estimate.mean,
                    e.estimate.stderr,
                    e.estimate.n,
                    self.seed,
                    self.beta,
                    l,
                    self.boundary
                )
            })
            .collect()
    }
}

/// Connected components of the graph of edges with `beta J > PROPOSAL_CUTOFF`,
/// over `num_vertices + 1` slots.
pub(crate) fn live_components(region: &Region<f64>, beta: f64) -> Vec<usize> {
    let n = region.num_vertices();
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n + 1);
    for e in region.all_edges() {
        if beta * e.coupling > PROPOSAL_CUTOFF {
            uf.union(e.u as usize, region.slot(e.v));
        }
    }
    (0..=n).map(|i| uf.find(i)).collect()
}
