//! Exact connection probabilities for a free/plus pair of sourceless
//! currents, and the path factor `Gamma` bounding the boundary-condition gap.
//!
//! Given the parity patterns `(r1, r2)`, every odd edge of either current is
//! open and every other edge is open independently, with probability
//! `1 - 1/cosh^2` on lattice edges (both currents even) and `1 - 1/cosh` on
//! ghost edges (only the plus current lives there). The joint law of the
//! forced-open set is accumulated exactly, pushed through a positive
//! per-edge transform to the law of the open set, and connectivity is read
//! off each open set by union-find.

use std::collections::{HashMap, VecDeque};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::parity::ParitySystem;
use super::{corr_free, corr_plus, EXACT_ABS_FLOOR, EXACT_REL_TOL};
use crate::error::{too_large, Error, Result};
use crate::model::CouplingModel;
use crate::num::Real;
use crate::region::Region;

/// Edges whose open state is enumerated.
pub const MAX_CONNECTIVITY_EDGES: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Vertex(u32),
    Ghost,
}

/// `P0 (x) P+ [x <-> target in hat(n1 + n2)]`. For a vertex target only
/// lattice edges count; a ghost target also uses the ghost edges of `n2`.
pub fn exact_connectivity_prob<T: Real>(region: &Region<T>, beta: T, x: u32, target: Target) -> Result<T> {
    let n = region.num_vertices();
    if x as usize >= n {
        return Err(Error::Domain(format!("vertex {x} outside the region")));
    }
    let goal = match target {
        Target::Vertex(y) if y as usize >= n => {
            return Err(Error::Domain(format!("vertex {y} outside the region")));
        }
        Target::Vertex(y) if y == x => return Ok(T::one()),
        Target::Vertex(y) => y as usize,
        Target::Ghost if !region.has_ghost() => {
            return Err(Error::Unsupported("ghost target on a region without ghost".into()))
        }
        Target::Ghost => n,
    };
    let lattice = region.lattice_edges().len();
    let m = match target {
        Target::Vertex(_) => lattice,
        Target::Ghost => region.num_edges(),
    };
    too_large("connectivity edges", m, MAX_CONNECTIVITY_EDGES)?;
    let keep: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };

    let free = region.free_view();
    let sys_free = ParitySystem::new(&free, beta, &[])?;
    let sys_plus = ParitySystem::new(region, beta, &[])?;
    let mut h1: HashMap<u64, T> = HashMap::new();
    let mut s1 = T::zero();
    for (r, w) in sys_free.patterns(0) {
        let e = h1.entry(r & keep).or_insert(T::zero());
        *e = *e + w;
        s1 = s1 + w;
    }
    let mut h2: HashMap<u64, T> = HashMap::new();
    let mut s2 = T::zero();
    for (r, w) in sys_plus.patterns(0) {
        let e = h2.entry(r & keep).or_insert(T::zero());
        *e = *e + w;
        s2 = s2 + w;
    }
    let norm = s1 * s2;

    let mut law = vec![T::zero(); 1 << m];
    for (&d1, &w1) in &h1 {
        for (&d2, &w2) in &h2 {
            let slot = &mut law[(d1 | d2) as usize];
            *slot = *slot + w1 * w2 / norm;
        }
    }
    for (i, e) in region.all_edges().take(m).enumerate() {
        let c = (beta * e.coupling).cosh();
        let closed = if e.is_ghost() { T::one() / c } else { T::one() / (c * c) };
        let open = T::one() - closed;
        let bit = 1usize << i;
        for mask in 0..law.len() {
            if mask & bit == 0 {
                let base = law[mask];
                law[mask | bit] = law[mask | bit] + open * base;
                law[mask] = closed * base;
            }
        }
    }

    let endpoints: Vec<(usize, usize)> = region
        .all_edges()
        .take(m)
        .map(|e| (e.u as usize, region.slot(e.v)))
        .collect();
    let mut total = T::zero();
    for (mask, &p) in law.iter().enumerate() {
        if p == T::zero() {
            continue;
        }
        let mut uf = UnionFind::<usize>::new(n + 1);
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            uf.union(endpoints[i].0, endpoints[i].1);
        }
        if uf.equiv(x as usize, goal) {
            total = total + p;
        }
    }
    Ok(total)
}

/// `prod_j min(tanh(beta J_j), (cosh(beta J_j) - 1) / sinh(beta J_j))` along a lattice path.
pub fn gamma_path<T: Real>(model: &CouplingModel<T>, beta: T, path: &[Vec<i64>]) -> Result<T> {
    let mut g = T::one();
    for w in path.windows(2) {
        g = g * gamma_factor(beta * model.coupling(&w[0], &w[1])?)?;
    }
    Ok(g)
}

/// As [`gamma_path`], for a vertex path in a region.
pub fn gamma_path_region<T: Real>(region: &Region<T>, beta: T, path: &[u32]) -> Result<T> {
    let mut g = T::one();
    for w in path.windows(2) {
        g = g * gamma_factor(beta * region.coupling_between(w[0], w[1]))?;
    }
    Ok(g)
}

fn gamma_factor<T: Real>(lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain("zero coupling on the path".into()));
    }
    let a = lambda.tanh();
    let b = (lambda.cosh() - T::one()) / lambda.sinh();
    Ok(a.min(b))
}

/// Up to `limit` shortest paths (by hop count) from `x` to `y` over positive lattice couplings.
pub fn shortest_positive_paths<T: Real>(region: &Region<T>, x: u32, y: u32, limit: usize) -> Vec<Vec<u32>> {
    let n = region.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in region.lattice_edges() {
        if e.coupling > T::zero() {
            adj[e.u as usize].push(e.v);
            adj[e.v as usize].push(e.u);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[x as usize] = 0;
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v as usize] {
            if dist[w as usize] == usize::MAX {
                dist[w as usize] = dist[v as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    if dist[y as usize] == usize::MAX {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut stack = vec![y];
    walk_back(&adj, &dist, &mut stack, limit, &mut out);
    out
}

fn walk_back(adj: &[Vec<u32>], dist: &[usize], stack: &mut Vec<u32>, limit: usize, out: &mut Vec<Vec<u32>>) {
    if out.len() >= limit {
        return;
    }
    let v = *stack.last().unwrap();
    if dist[v as usize] == 0 {
        out.push(stack.iter().rev().copied().collect());
        return;
    }
    for &w in &adj[v as usize] {
        if dist[w as usize] + 1 == dist[v as usize] {
            stack.push(w);
            walk_back(adj, dist, stack, limit, out);
            stack.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport<T> {
    pub gap: T,
    pub connection_to_ghost: T,
    pub gamma: T,
    pub bound: T,
    pub path: Vec<u32>,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

impl<T: Real> SandwichReport<T> {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

/// Checks `0 <= <s_x s_y>+ - <s_x s_y>0 <= Gamma^-1 P0 (x) P+ [x <-> ghost]`,
/// taking the best `Gamma` over up to 100 shortest positive paths.
pub fn verify_gamma_sandwich<T: Real>(region: &Region<T>, beta: T, x: u32, y: u32) -> Result<SandwichReport<T>> {
    if !region.has_ghost() {
        return Err(Error::Unsupported("the sandwich needs a plus region".into()));
    }
    let paths = shortest_positive_paths(region, x, y, 100);
    if paths.is_empty() {
        return Err(Error::Domain(format!("no positive-coupling path from {x} to {y}")));
    }
    let mut best = (T::zero(), Vec::new());
    for p in paths {
        let g = gamma_path_region(region, beta, &p)?;
        if g > best.0 {
            best = (g, p);
        }
    }
    let gap = corr_plus(region, beta, x, y)?.value - corr_free(region, beta, x, y)?.value;
    let conn = exact_connectivity_prob(region, beta, x, Target::Ghost)?;
    let bound = conn / best.0;
    let slack = T::lit(EXACT_REL_TOL) * bound.abs().max(T::one()) + T::lit(EXACT_ABS_FLOOR);
    Ok(SandwichReport {
        gap,
        connection_to_ghost: conn,
        gamma: best.0,
        bound,
        path: best.1,
        lower_holds: gap >= -slack,
        upper_holds: gap <= bound + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ParityCorrelations;
    use crate::region::Boundary;
    use approx::assert_relative_eq;

    fn plus_triangle() -> Region<f64> {
        Region::from_graph(
            3,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)],
            &[(0, 0.5), (1, 1.0), (2, 0.25)],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn product_identity_on_triangle() {
        let r = plus_triangle();
        let beta = 0.5;
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let p = exact_connectivity_prob(&r, beta, x, Target::Vertex(y)).unwrap();
            let prod = corr_free(&r, beta, x, y).unwrap().value * corr_plus(&r, beta, x, y).unwrap().value;
            assert_relative_eq!(p, prod, max_relative = 1e-12);
        }
        assert_eq!(exact_connectivity_prob(&r, beta, 1, Target::Vertex(1)).unwrap(), 1.0);
        assert!(exact_connectivity_prob(&r, 1e-9, 0, Target::Vertex(2)).unwrap() < 1e-15);
    }

    #[test]
    fn product_identity_on_plus_box() {
        let m = CouplingModel::<f64>::nearest_neighbor(2);
        let r = Region::lattice_box(&m, 1, Boundary::Plus).unwrap();
        let free = ParityCorrelations::new(&r.free_view(), 0.6).unwrap();
        let plus = ParityCorrelations::new(&r, 0.6).unwrap();
        for y in [1u32, 4, 8] {
            let p = exact_connectivity_prob(&r, 0.6, 0, Target::Vertex(y)).unwrap();
            let prod = free.corr(0, y).unwrap().value * plus.corr(0, y).unwrap().value;
            assert_relative_eq!(p, prod, max_relative = 1e-11);
        }
    }

    /// Oracle: the joint per-edge states worked out by hand.
    #[test]
    fn ghost_connection_against_state_enumeration() {
        let r = Region::from_graph(2, &[(0, 1, 1.0)], &[(0, 0.4), (1, 0.7)], 0.0).unwrap();
        let beta = 0.8;
        let (l, a, b) = (beta * 1.0f64, beta * 0.4f64, beta * 0.7f64);
        // the free current is even on the single edge; the plus current has
        // all three edges of equal parity
        let t = l.tanh() * a.tanh() * b.tanh();
        let p_odd = t / (1.0 + t);
        let q_l = 1.0 - 1.0 / (l.cosh() * l.cosh());
        let (q_a, q_b) = (1.0 - 1.0 / a.cosh(), 1.0 - 1.0 / b.cosh());
        let expected = p_odd + (1.0 - p_odd) * (q_a + (1.0 - q_a) * q_l * q_b);
        let p = exact_connectivity_prob(&r, beta, 0, Target::Ghost).unwrap();
        assert_relative_eq!(p, expected, max_relative = 1e-13);
    }

    #[test]
    fn gamma_examples() {
        let m = CouplingModel::<f64>::nearest_neighbor(1);
        assert_relative_eq!(
            gamma_path(&m, 0.8, &[vec![0], vec![1]]).unwrap(),
            0.4f64.tanh(),
            max_relative = 1e-14
        );
        assert_eq!(gamma_path(&m, 0.8, &[vec![3]]).unwrap(), 1.0);
        let two = gamma_path(&m, 1.0, &[vec![0], vec![1], vec![2]]).unwrap();
        let direct = 1f64.tanh().min((1f64.cosh() - 1.0) / 1f64.sinh());
        assert_relative_eq!(two, direct * direct, max_relative = 1e-14);
        assert_relative_eq!(two, 0.5f64.tanh().powi(2), max_relative = 1e-14);
        assert!(gamma_path(&m, 1.0, &[vec![0], vec![2]]).is_err());
    }

    #[test]
    fn shortest_paths_on_a_square() {
        let r = Region::<f64>::from_graph(4, &[(0, 1, 1.0), (1, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)], &[], 0.0)
            .unwrap();
        let mut paths = shortest_positive_paths(&r, 0, 3, 100);
        paths.sort();
        assert_eq!(paths, vec![vec![0, 1, 3], vec![0, 2, 3]]);
        assert_eq!(shortest_positive_paths(&r, 0, 3, 1).len(), 1);
    }

    #[test]
    fn sandwich_examples() {
        let m = CouplingModel::<f64>::nearest_neighbor(2);
        let sq = Region::lattice_box(&m, 1, Boundary::Plus).unwrap();
        let sub: Vec<(u32, u32, f64)> = vec![(0, 1, 1.0), (1, 3, 1.0), (3, 2, 1.0), (2, 0, 1.0)];
        let square = Region::from_graph(4, &sub, &[(0, 2.0), (1, 2.0), (2, 2.0), (3, 2.0)], 0.0).unwrap();
        let rep = verify_gamma_sandwich(&square, 0.6, 0, 3).unwrap();
        assert!(rep.holds(), "{rep:?}");
        assert!(rep.gap > 0.0);
        let chain = Region::<f64>::from_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)], &[(0, 1.0), (3, 1.0)], 0.0)
            .unwrap();
        for (x, y) in [(0, 3), (1, 2), (0, 1)] {
            assert!(verify_gamma_sandwich(&chain, 1.0, x, y).unwrap().holds());
        }
        let tiny = verify_gamma_sandwich(&chain, 1e-6, 0, 3).unwrap();
        assert!(tiny.holds() && tiny.gap.abs() < 1e-10);
        assert!(verify_gamma_sandwich(&sq.free_view(), 0.5, 0, 1).is_err());
    }
}
