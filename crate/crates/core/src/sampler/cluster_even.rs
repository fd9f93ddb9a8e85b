//! Sourceless parity configurations from random-cluster bonds.
//!
//! The bonds of a Swendsen-Wang update are distributed as the random-cluster
//! measure with `p = 1 - exp(-2 beta J)`. A uniformly random even subgraph of
//! those bonds has law proportional to `prod tanh(beta J)` over its edges,
//! which is the parity law of a sourceless current. Under plus boundary
//! conditions the ghost is an ordinary vertex of the graph.

use rand::Rng;

use super::spin::SpinChain;
use crate::currents::ParityConfig;
use crate::error::Result;
use crate::region::Region;
use crate::rng::chain_rng;

/// Uniform even subgraph of the open `bonds` on `slots` vertices. Non-tree
/// edges of a spanning forest are kept with probability 1/2; tree edges are
/// then fixed leaf to root so that every degree is even.
pub fn uniform_even_subgraph<R: Rng>(
    slots: usize,
    edges: &[(u32, u32)],
    bonds: &[bool],
    rng: &mut R,
    out: &mut ParityConfig,
) {
    let m = edges.len();
    out.0.clear();
    out.0.resize(m, false);
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); slots];
    for (i, (&(u, v), &b)) in edges.iter().zip(bonds).enumerate() {
        if b {
            adj[u as usize].push((v, i as u32));
            adj[v as usize].push((u, i as u32));
        }
    }
    let mut parent_edge = vec![u32::MAX; slots];
    let mut seen = vec![false; slots];
    let mut tree = vec![false; m];
    let mut order = Vec::with_capacity(slots);
    for root in 0..slots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root as u32);
        let mut k = start;
        while k < order.len() {
            let x = order[k] as usize;
            k += 1;
            for &(y, e) in &adj[x] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    parent_edge[y as usize] = e;
                    tree[e as usize] = true;
                    order.push(y);
                }
            }
        }
    }
    let mut odd_degree = vec![false; slots];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if bonds[i] && !tree[i] && rng.random::<bool>() {
            out.0[i] = true;
            odd_degree[u as usize] ^= true;
            odd_degree[v as usize] ^= true;
        }
    }
    for &x in order.iter().rev() {
        let x = x as usize;
        let e = parent_edge[x];
        if e != u32::MAX && odd_degree[x] {
            let (u, v) = edges[e as usize];
            out.0[e as usize] = true;
            odd_degree[u as usize] ^= true;
            odd_degree[v as usize] ^= true;
        }
    }
}

/// Swendsen-Wang chain emitting one sourceless parity configuration per update.
pub struct ClusterEvenChain {
    spins: SpinChain,
    slots: usize,
    edges: Vec<(u32, u32)>,
    bonds: Vec<bool>,
    parity: ParityConfig,
}

impl ClusterEvenChain {
    pub fn new(region: &Region<f64>, beta: f64, seed: u64, chain: u64) -> Result<Self> {
        if region.field() != 0.0 {
            return Err(crate::error::Error::Unsupported(
                "the cluster sampler needs a field-free weight".into(),
            ));
        }
        let edges = region
            .all_edges()
            .map(|e| (e.u, region.slot(e.v) as u32))
            .collect();
        Ok(Self {
            spins: SpinChain::new(region, beta, chain_rng(seed, chain)),
            slots: region.num_vertices() + usize::from(region.has_ghost()),
            edges,
            bonds: Vec::new(),
            parity: ParityConfig::all_even(region.num_edges()),
        })
    }

    /// Advances the spins without producing a configuration.
    pub fn sweep(&mut self) {
        self.spins.sw_sweep(&mut self.bonds);
    }

    /// One update; the returned configuration is drawn from its bonds.
    pub fn next_config(&mut self) -> &ParityConfig {
        self.spins.sw_sweep(&mut self.bonds);
        let Self {
            spins,
            slots,
            edges,
            bonds,
            parity,
        } = self;
        uniform_even_subgraph(*slots, edges, bonds, spins.rng(), parity);
        &self.parity
    }
}
