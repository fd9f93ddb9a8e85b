//! Currents: nonnegative integer edge labelings, their sources, weights,
//! parity skeletons and open-edge projections.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::region::{edge_key, Region, GHOST};

pub type EdgeKey = (u32, u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Source set; the ghost is never listed.
pub type SourceSet = BTreeSet<u32>;

/// Per-edge odd flags, indexed like `Region::all_edges`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParityConfig(pub Vec<bool>);

/// Per-edge open flags, indexed like `Region::all_edges`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpenConfig(pub Vec<bool>);

impl ParityConfig {
    pub fn all_even(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn parity(&self, e: usize) -> Parity {
        if self.0[e] {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// Bit `e` set for odd edges; only for at most 64 edges.
    pub fn to_mask(&self) -> u64 {
        assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| m | (u64::from(b) << i))
    }

    pub fn from_mask(m: usize, mask: u64) -> Self {
        Self((0..m).map(|i| mask >> i & 1 == 1).collect())
    }

    /// Lattice vertices of odd degree in the odd-edge subgraph.
    pub fn odd_vertices<T: Real>(&self, region: &Region<T>) -> SourceSet {
        let mut deg = vec![false; region.num_vertices()];
        for (e, odd) in region.all_edges().zip(&self.0) {
            if *odd {
                deg[e.u as usize] ^= true;
                if e.v != GHOST {
                    deg[e.v as usize] ^= true;
                }
            }
        }
        deg.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect()
    }
}

impl OpenConfig {
    pub fn all_closed(m: usize) -> Self {
        Self(vec![false; m])
    }

    pub fn all_open(m: usize) -> Self {
        Self(vec![true; m])
    }

    pub fn num_open(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Edgewise OR.
    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.0.len(), other.0.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }
}

/// Sparse current on the edges (ghost edges included) of a region.
#[derive(Debug, Clone)]
pub struct Current<T> {
    region: Arc<Region<T>>,
    mult: BTreeMap<EdgeKey, u32>,
}

impl<T: Real> PartialEq for Current<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mult == other.mult && same_edge_set(&self.region, &other.region)
    }
}

fn same_edge_set<T: Real>(a: &Region<T>, b: &Region<T>) -> bool {
    a.num_vertices() == b.num_vertices()
        && a.num_edges() == b.num_edges()
        && a.all_edges().all(|e| b.edge_index(e.u, e.v).is_some())
}

fn edge_subset<T: Real>(a: &Region<T>, b: &Region<T>) -> bool {
    a.num_vertices() <= b.num_vertices() && a.all_edges().all(|e| b.edge_index(e.u, e.v).is_some())
}

impl<T: Real> Current<T> {
    pub fn zero(region: Arc<Region<T>>) -> Self {
        Self {
            region,
            mult: BTreeMap::new(),
        }
    }

    /// Builds a current from `(u, v, multiplicity)` triples; `GHOST` names the ghost.
    pub fn from_entries(region: Arc<Region<T>>, entries: &[(u32, u32, u32)]) -> Result<Self> {
        let mut n = Self::zero(region);
        for &(a, b, m) in entries {
            let key = edge_key(a, b);
            let old = n.get(key.0, key.1);
            n.set(key.0, key.1, old + m)?;
        }
        Ok(n)
    }

    /// Current with multiplicities indexed like `Region::all_edges`.
    pub fn from_dense(region: Arc<Region<T>>, dense: &[u32]) -> Self {
        assert_eq!(dense.len(), region.num_edges());
        let mult = region
            .all_edges()
            .zip(dense)
            .filter(|(_, &m)| m > 0)
            .map(|(e, &m)| (e.key(), m))
            .collect();
        Self { region, mult }
    }

    pub fn region(&self) -> &Arc<Region<T>> {
        &self.region
    }

    pub fn get(&self, a: u32, b: u32) -> u32 {
        self.mult.get(&edge_key(a, b)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, a: u32, b: u32, m: u32) -> Result<()> {
        let key = edge_key(a, b);
        if self.region.edge_index(key.0, key.1).is_none() {
            return Err(Error::Domain(format!("edge {key:?} not in region")));
        }
        if m == 0 {
            self.mult.remove(&key);
        } else {
            self.mult.insert(key, m);
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (EdgeKey, u32)> + '_ {
        self.mult.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.mult.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.mult.values().map(|&m| u64::from(m)).sum()
    }

    /// Multiplicities indexed like `Region::all_edges`.
    pub fn dense(&self) -> Vec<u32> {
        self.region.all_edges().map(|e| self.get(e.u, e.v)).collect()
    }

    /// `dn`: lattice vertices of odd total flux.
    pub fn sources(&self) -> SourceSet {
        let mut odd = BTreeSet::new();
        for (&(u, v), &m) in &self.mult {
            if m % 2 == 1 {
                for w in [u, v] {
                    if w != GHOST && !odd.insert(w) {
                        odd.remove(&w);
                    }
                }
            }
        }
        odd
    }

    /// Total flux into the ghost.
    pub fn ghost_flux(&self) -> u64 {
        self.mult
            .iter()
            .filter(|((_, v), _)| *v == GHOST)
            .map(|(_, &m)| u64::from(m))
            .sum()
    }

    /// `ln w_beta(n) = sum_e (n_e ln(beta J_e) - ln n_e!)`; `-inf` when a
    /// zero coupling carries flux.
    pub fn log_weight(&self, beta: T) -> Result<T> {
        if !(beta > T::zero()) {
            return Err(Error::Domain(format!("beta = {beta} must be positive")));
        }
        let mut total = T::zero();
        for (&(u, v), &m) in &self.mult {
            let lambda = beta * self.region.coupling_between(u, v);
            if lambda == T::zero() {
                return Ok(T::neg_infinity());
            }
            total = total + T::from_u32(m).unwrap() * lambda.ln() - T::lit(ln_factorial(u64::from(m)));
        }
        Ok(total)
    }

    pub fn parity(&self) -> ParityConfig {
        ParityConfig(self.dense().iter().map(|m| m % 2 == 1).collect())
    }

    pub fn hat(&self) -> OpenConfig {
        OpenConfig(self.dense().iter().map(|&m| m > 0).collect())
    }

    /// Edgewise sum. A current on a subregion is zero-extended to the larger one.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let region = if Arc::ptr_eq(&self.region, &other.region) || edge_subset(&other.region, &self.region) {
            self.region.clone()
        } else if edge_subset(&self.region, &other.region) {
            other.region.clone()
        } else {
            return Err(Error::IncompatibleRegions(
                "neither edge set contains the other".into(),
            ));
        };
        let mut mult = self.mult.clone();
        for (&k, &m) in &other.mult {
            *mult.entry(k).or_insert(0) += m;
        }
        Ok(Self { region, mult })
    }

    /// Line format: a `#` header naming the region, then `u v m` per stored edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("# current {}\n", self.region.describe());
        for (&(u, v), &m) in &self.mult {
            let v = if v == GHOST { "ghost".to_string() } else { v.to_string() };
            writeln!(s, "{u} {v} {m}").unwrap();
        }
        s
    }

    pub fn from_text(region: Arc<Region<T>>, text: &str) -> Result<Self> {
        let mut n = Self::zero(region);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_vertex = |s: &str| -> Result<u32> {
                if s == "ghost" {
                    Ok(GHOST)
                } else {
                    s.parse()
                        .map_err(|_| Error::Config(format!("line {}: bad vertex {s:?}", lineno + 1)))
                }
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!("line {}: expected `u v m`", lineno + 1)));
            }
            let m: u32 = fields[2]
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad multiplicity", lineno + 1)))?;
            let (u, v) = (parse_vertex(fields[0])?, parse_vertex(fields[1])?);
            let old = n.get(u, v);
            n.set(u, v, old + m)?;
        }
        Ok(n)
    }
}

/// `sum_{n = parity} lambda^n / n!`: cosh for even, sinh for odd.
pub fn edge_block_factor<T: Real>(parity: Parity, lambda: T) -> T {
    match parity {
        Parity::Even => lambda.cosh(),
        Parity::Odd => lambda.sinh(),
    }
}
