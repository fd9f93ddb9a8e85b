//! The combinatorial core of the switching lemma, checked in exact integers:
//!
//! `sum_{n <= m, n on G, dn = {x,y}} C(m,n) = 1[x <-> y in G under hat(m)] sum_{n <= m, n on G, dn = 0} C(m,n)`
//!
//! with `C(m,n) = prod_e binom(m_e, n_e)`. Sources here treat the ghost as an
//! ordinary vertex.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::currents::Current;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::region::Region;

pub const SWITCHING_CAP: u32 = 4;
pub const SWITCHING_TOTAL_LIMIT: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eq10Report {
    pub lhs: u128,
    pub rhs: u128,
    pub connected: bool,
    pub holds: bool,
}

fn binomial(n: u32, k: u32) -> u128 {
    let mut c = 1u128;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    c
}

/// `source mask -> sum of C(m,n)` over subcurrents `n <= m` restricted to the
/// edges with `in_g[e]`. Edges are `(slot_u, slot_v)`, slots below 64.
pub fn switching_table(edges: &[(usize, usize)], m: &[u32], in_g: &[bool]) -> HashMap<u64, u128> {
    let live: Vec<(u64, u32)> = edges
        .iter()
        .zip(m)
        .zip(in_g)
        .filter(|((_, &me), &g)| g && me > 0)
        .map(|((&(u, v), &me), _)| ((1u64 << u) ^ (1u64 << v), me))
        .collect();
    let binom: Vec<Vec<u128>> = live
        .iter()
        .map(|&(_, me)| (0..=me).map(|k| binomial(me, k)).collect())
        .collect();
    let mut table = HashMap::new();
    let mut n = vec![0u32; live.len()];
    loop {
        let mut mask = 0u64;
        let mut c = 1u128;
        for (i, &k) in n.iter().enumerate() {
            if k % 2 == 1 {
                mask ^= live[i].0;
            }
            c *= binom[i][k as usize];
        }
        *table.entry(mask).or_insert(0) += c;
        // odometer
        let mut i = 0;
        loop {
            if i == n.len() {
                return table;
            }
            if n[i] < live[i].1 {
                n[i] += 1;
                break;
            }
            n[i] = 0;
            i += 1;
        }
    }
}

/// Checks the identity for the current `m` on `H = m.region()`, the subgraph
/// `g` of `H` and the source pair `{x, y}` (vertex slots; the ghost is slot `|V|`).
pub fn verify_eq10<T: Real>(m: &Current<T>, x: usize, y: usize, g: &Region<T>) -> Result<Eq10Report> {
    let h = m.region();
    let slots = h.num_vertices() + 1;
    if slots > 64 {
        return Err(Error::TooLarge {
            what: "switching vertices",
            size: slots,
            limit: 64,
        });
    }
    if x >= slots || y >= slots {
        return Err(Error::Domain(format!("source pair ({x},{y}) outside the region")));
    }
    if g.all_edges().any(|e| h.edge_index(e.u, e.v).is_none()) {
        return Err(Error::IncompatibleRegions("G is not a subgraph of H".into()));
    }
    let dense = m.dense();
    if let Some(&big) = dense.iter().find(|&&k| k > SWITCHING_CAP) {
        return Err(Error::Domain(format!("multiplicity {big} exceeds the cap {SWITCHING_CAP}")));
    }
    if m.total() > SWITCHING_TOTAL_LIMIT {
        return Err(Error::Domain(format!(
            "total multiplicity {} exceeds {SWITCHING_TOTAL_LIMIT}",
            m.total()
        )));
    }
    let edges: Vec<(usize, usize)> = h.all_edges().map(|e| (e.u as usize, h.slot(e.v))).collect();
    let in_g: Vec<bool> = h.all_edges().map(|e| g.edge_index(e.u, e.v).is_some()).collect();
    let table = switching_table(&edges, &dense, &in_g);
    let mut uf = UnionFind::<usize>::new(slots);
    for ((&(u, v), &k), &ing) in edges.iter().zip(&dense).zip(&in_g) {
        if ing && k > 0 {
            uf.union(u, v);
        }
    }
    let connected = uf.equiv(x, y);
    let pair = (1u64 << x) ^ (1u64 << y);
    let lhs = table.get(&pair).copied().unwrap_or(0);
    let empty = table.get(&0).copied().unwrap_or(0);
    let rhs = if connected { empty } else { 0 };
    Ok(Eq10Report {
        lhs,
        rhs,
        connected,
        holds: lhs == rhs,
    })
}
