//! Bundled small graphs (at most six edges, ghost edges included) used by
//! the sampler validation and the CLI oracle suite.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::region::Region;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusGraph {
    pub name: &'static str,
    pub vertices: usize,
    pub edges: Vec<(u32, u32, f64)>,
    pub ghost: Vec<(u32, f64)>,
}

impl CorpusGraph {
    pub fn region(&self) -> Result<Region<f64>> {
        Region::from_graph(self.vertices, &self.edges, &self.ghost, 0.0)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len() + self.ghost.len()
    }
}

fn g(name: &'static str, vertices: usize, edges: &[(u32, u32, f64)], ghost: &[(u32, f64)]) -> CorpusGraph {
    CorpusGraph {
        name,
        vertices,
        edges: edges.to_vec(),
        ghost: ghost.to_vec(),
    }
}

pub fn small_graphs() -> Vec<CorpusGraph> {
    vec![
        g("edge", 2, &[(0, 1, 1.0)], &[]),
        g("path3", 3, &[(0, 1, 1.0), (1, 2, 0.5)], &[]),
        g("triangle", 3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[]),
        g("triangle-weighted", 3, &[(0, 1, 0.3), (1, 2, 1.2), (0, 2, 2.0)], &[]),
        g("square", 4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)], &[]),
        g("paw", 4, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0)], &[]),
        g("diamond", 4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0), (0, 2, 0.8)], &[]),
        g(
            "k4",
            4,
            &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
            &[],
        ),
        g("pentagon", 5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 4, 1.0)], &[]),
        g(
            "hexagon",
            6,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (0, 5, 1.0)],
            &[],
        ),
        g(
            "bowtie",
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (2, 4, 1.0)],
            &[],
        ),
        g(
            "k23",
            5,
            &[(0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0), (1, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0)],
            &[],
        ),
        g("star-ghost", 4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], &[(1, 0.6), (2, 0.6), (3, 0.6)]),
        g("edge-ghost", 2, &[(0, 1, 1.0)], &[(0, 1.0), (1, 1.0)]),
        g("triangle-ghost", 3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[(0, 0.5), (1, 1.5)]),
        g("square-ghost", 4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)], &[(0, 1.0), (2, 1.0)]),
        g("path-ghost", 3, &[(0, 1, 1.0), (1, 2, 1.0)], &[(0, 2.0), (1, 0.3), (2, 2.0)]),
    ]
}

/// Connected simple graphs with `1..=max_edges` edges, one per isomorphism
/// class, on vertices `0..v` with no isolated vertex.
pub fn connected_graphs(max_edges: usize) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    for e in 1..=max_edges {
        let mut seen = std::collections::HashSet::new();
        for v in 2..=e + 1 {
            let pairs: Vec<(u32, u32)> = (0..v as u32).flat_map(|a| (a + 1..v as u32).map(move |b| (a, b))).collect();
            let perms: Vec<Vec<u32>> = (0..v as u32).permutations(v).collect();
            for edges in pairs.iter().copied().combinations(e) {
                if !spans_connected(v, &edges) {
                    continue;
                }
                let canon = perms
                    .iter()
                    .map(|p| {
                        let mut c: Vec<(u32, u32)> = edges
                            .iter()
                            .map(|&(a, b)| {
                                let (x, y) = (p[a as usize], p[b as usize]);
                                (x.min(y), x.max(y))
                            })
                            .collect();
                        c.sort_unstable();
                        c
                    })
                    .min()
                    .unwrap();
                if seen.insert(canon) {
                    out.push(edges);
                }
            }
        }
    }
    out
}

/// Random connected region with at most `max_vertices` vertices and
/// `max_edges` edges (ghost edges included when `plus`), couplings in `[0.2, 1.5]`.
pub fn random_region<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize, plus: bool) -> Result<Region<f64>> {
    let max_vertices = max_vertices.min(max_edges + 1 - usize::from(plus)).max(2);
    let v = rng.random_range(2..=max_vertices);
    let ghosts = if plus { rng.random_range(1..=v.min(max_edges + 1 - v)) } else { 0 };
    let budget = (max_edges - ghosts).min(v * (v - 1) / 2);
    let target = rng.random_range(v - 1..=budget);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(target);
    for i in 1..v as u32 {
        pairs.push((rng.random_range(0..i), i));
    }
    let mut rest: Vec<(u32, u32)> = (0..v as u32)
        .flat_map(|a| (a + 1..v as u32).map(move |b| (a, b)))
        .filter(|p| !pairs.contains(p))
        .collect();
    rest.shuffle(rng);
    pairs.extend(rest.into_iter().take(target - (v - 1)));
    let edges: Vec<(u32, u32, f64)> = pairs.into_iter().map(|(a, b)| (a, b, rng.random_range(0.2..=1.5))).collect();
    let mut sites: Vec<u32> = (0..v as u32).collect();
    sites.shuffle(rng);
    let ghost: Vec<(u32, f64)> = sites.into_iter().take(ghosts).map(|x| (x, rng.random_range(0.2..=1.5))).collect();
    Region::from_graph(v, &edges, &ghost, 0.0)
}

fn spans_connected(v: usize, edges: &[(u32, u32)]) -> bool {
    let mut uf = petgraph::unionfind::UnionFind::<u32>::new(v);
    let mut touched = vec![false; v];
    for &(a, b) in edges {
        uf.union(a, b);
        touched[a as usize] = true;
        touched[b as usize] = true;
    }
    touched.iter().all(|&t| t) && (1..v as u32).all(|x| uf.equiv(0, x))
}
