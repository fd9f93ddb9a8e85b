//! Finite regions: boxes `[-L,L]^d`, tori and explicit small graphs, with
//! materialized couplings and an optional ghost vertex for plus boundary
//! conditions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{box_points, CouplingModel};
use crate::num::Real;

/// Vertex id reserved for the ghost site in edge keys.
pub const GHOST: u32 = u32::MAX;

/// Couplings below this value are not materialized in finite regions.
pub const COUPLING_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Box { half_width: usize },
    Torus { side: usize },
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Free,
    Plus,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Free => "free",
            Boundary::Plus => "plus",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(Boundary::Free),
            "plus" => Ok(Boundary::Plus),
            other => Err(Error::Config(format!("unknown boundary condition {other:?}"))),
        }
    }
}

/// Undirected edge with `u < v`; `v == GHOST` marks a ghost edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub u: u32,
    pub v: u32,
    pub coupling: T,
}

impl<T> Edge<T> {
    pub fn key(&self) -> (u32, u32) {
        (self.u, self.v)
    }

    pub fn is_ghost(&self) -> bool {
        self.v == GHOST
    }
}

pub fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    dimension: usize,
    shape: Shape,
    boundary: Boundary,
    coords: Vec<Vec<i64>>,
    num_vertices: usize,
    edges: Vec<Edge<T>>,
    ghost: Vec<Edge<T>>,
    field: T,
    #[serde(skip)]
    index: HashMap<(u32, u32), usize>,
}

impl<T: Real> Region<T> {
    /// Box `[-L,L]^d`; under plus boundary conditions the exterior is
    /// replaced by ghost couplings `J(x, delta)`.
    pub fn lattice_box(model: &CouplingModel<T>, half_width: usize, boundary: Boundary) -> Result<Self> {
        let d = model.dimension();
        let l = half_width as i64;
        let coords: Vec<Vec<i64>> = box_points(d, l).collect();
        crate::error::too_large("box vertices", coords.len(), 1 << 22)?;
        let edges = if model.is_finite_range() {
            nearest_neighbor_edges(model, &coords, |c| {
                let side = 2 * l + 1;
                c.iter().try_fold(0i64, |acc, &x| {
                    (x.abs() <= l).then_some(acc * side + x + l)
                })
            })
        } else {
            all_pair_edges(&coords, |a, b| model.at_distance(crate::model::l1_distance(a, b)))
        };
        let mut ghost = Vec::new();
        if boundary == Boundary::Plus {
            let cutoff = T::lit(COUPLING_CUTOFF);
            for (i, x) in coords.iter().enumerate() {
                let j = model.ghost_coupling_box(half_width, x)?;
                if j >= cutoff {
                    ghost.push(Edge { u: i as u32, v: GHOST, coupling: j });
                }
            }
        }
        Ok(Self::assemble(
            d,
            Shape::Box { half_width },
            boundary,
            coords,
            None,
            edges,
            ghost,
            model.field(),
        ))
    }

    /// Torus `(Z/LZ)^d` with minimal-image distances; never carries a ghost.
    pub fn torus(model: &CouplingModel<T>, side: usize) -> Result<Self> {
        if side < 3 {
            return Err(Error::Domain(format!("torus side {side} < 3")));
        }
        let d = model.dimension();
        let n = side.pow(d as u32);
        crate::error::too_large("torus vertices", n, 1 << 22)?;
        let s = side as i64;
        let coords: Vec<Vec<i64>> = (0..n)
            .map(|mut idx| {
                let mut v = vec![0i64; d];
                for c in v.iter_mut().rev() {
                    *c = (idx % side) as i64;
                    idx /= side;
                }
                v
            })
            .collect();
        let edges = if model.is_finite_range() {
            nearest_neighbor_edges(model, &coords, |c| {
                Some(c.iter().fold(0i64, |acc, &x| acc * s + x.rem_euclid(s)))
            })
        } else {
            all_pair_edges(&coords, |a, b| {
                let r: u64 = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let diff = (x - y).rem_euclid(s);
                        diff.min(s - diff) as u64
                    })
                    .sum();
                model.at_distance(r)
            })
        };
        Ok(Self::assemble(
            d,
            Shape::Torus { side },
            Boundary::Free,
            coords,
            None,
            edges,
            Vec::new(),
            model.field(),
        ))
    }

    /// Explicit graph on vertices `0..n`; a nonempty `ghost` list makes it a plus region.
    pub fn from_graph(n: usize, edges: &[(u32, u32, T)], ghost: &[(u32, T)], field: T) -> Result<Self> {
        let mut lattice = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for &(a, b, j) in edges {
            if a == b {
                return Err(Error::Domain(format!("self-loop at {a}")));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::Domain(format!("edge ({a},{b}) outside 0..{n}")));
            }
            if !(j >= T::zero()) {
                return Err(Error::Domain(format!("negative coupling on ({a},{b})")));
            }
            let (u, v) = edge_key(a, b);
            if !seen.insert((u, v)) {
                return Err(Error::Domain(format!("duplicate edge ({u},{v})")));
            }
            lattice.push(Edge { u, v, coupling: j });
        }
        let mut ghost_edges = Vec::with_capacity(ghost.len());
        for &(x, j) in ghost {
            if x as usize >= n || !(j >= T::zero()) || !seen.insert((x, GHOST)) {
                return Err(Error::Domain(format!("invalid ghost coupling at {x}")));
            }
            ghost_edges.push(Edge { u: x, v: GHOST, coupling: j });
        }
        ghost_edges.sort_by_key(|e| e.u);
        let boundary = if ghost.is_empty() { Boundary::Free } else { Boundary::Plus };
        Ok(Self::assemble(0, Shape::Graph, boundary, Vec::new(), Some(n), lattice, ghost_edges, field))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dimension: usize,
        shape: Shape,
        boundary: Boundary,
        coords: Vec<Vec<i64>>,
        n: Option<usize>,
        edges: Vec<Edge<T>>,
        ghost: Vec<Edge<T>>,
        field: T,
    ) -> Self {
        let num_vertices = n.unwrap_or(coords.len());
        let mut region = Self {
            dimension,
            shape,
            boundary,
            coords,
            num_vertices,
            edges,
            ghost,
            field,
            index: HashMap::new(),
        };
        region.rebuild_index();
        region
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .edges
            .iter()
            .chain(&self.ghost)
            .enumerate()
            .map(|(i, e)| (e.key(), i))
            .collect();
    }

    /// Restores the edge index after deserialization.
    pub fn reindexed(mut self) -> Self {
        self.rebuild_index();
        self
    }

    /// The same vertex and lattice edge set without the ghost.
    pub fn free_view(&self) -> Self {
        let mut r = self.clone();
        r.ghost.clear();
        r.boundary = Boundary::Free;
        r.rebuild_index();
        r
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn field(&self) -> T {
        self.field
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// True under plus boundary conditions, even if every ghost coupling vanished.
    pub fn has_ghost(&self) -> bool {
        self.boundary == Boundary::Plus
    }

    pub fn lattice_edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn ghost_edges(&self) -> &[Edge<T>] {
        &self.ghost
    }

    /// Lattice edges followed by ghost edges; the indexing used by parity
    /// and open configurations.
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge<T>> + Clone {
        self.edges.iter().chain(&self.ghost)
    }

    pub fn edge(&self, i: usize) -> &Edge<T> {
        if i < self.edges.len() {
            &self.edges[i]
        } else {
            &self.ghost[i - self.edges.len()]
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len() + self.ghost.len()
    }

    pub fn edge_index(&self, a: u32, b: u32) -> Option<usize> {
        self.index.get(&edge_key(a, b)).copied()
    }

    pub fn coupling_between(&self, a: u32, b: u32) -> T {
        self.edge_index(a, b)
            .map(|i| self.edge(i).coupling)
            .unwrap_or_else(T::zero)
    }

    pub fn ghost_coupling_of(&self, x: u32) -> T {
        self.coupling_between(x, GHOST)
    }

    pub fn coords(&self, v: usize) -> Option<&[i64]> {
        self.coords.get(v).map(|c| c.as_slice())
    }

    pub fn vertex_at(&self, x: &[i64]) -> Option<usize> {
        match self.shape {
            Shape::Box { half_width } => {
                let l = half_width as i64;
                let side = 2 * l + 1;
                if x.len() != self.dimension || x.iter().any(|c| c.abs() > l) {
                    return None;
                }
                Some(x.iter().fold(0i64, |acc, &c| acc * side + c + l) as usize)
            }
            Shape::Torus { side } => {
                if x.len() != self.dimension {
                    return None;
                }
                let s = side as i64;
                Some(x.iter().fold(0i64, |acc, &c| acc * s + c.rem_euclid(s)) as usize)
            }
            Shape::Graph => None,
        }
    }

    /// The origin of a box or torus, vertex 0 of a graph.
    pub fn center(&self) -> usize {
        self.vertex_at(&vec![0; self.dimension]).unwrap_or(0)
    }

    /// Vertices of the centered sub-box `[-k,k]^d`.
    pub fn sub_box(&self, k: usize) -> Vec<usize> {
        match self.shape {
            Shape::Box { half_width } => {
                let k = k.min(half_width) as i64;
                box_points(self.dimension, k)
                    .map(|x| self.vertex_at(&x).unwrap())
                    .collect()
            }
            _ => (0..self.num_vertices).collect(),
        }
    }

    /// Vertices of the axis segment `{t e_1 : |t| <= k}`.
    pub fn axis_segment(&self, k: usize) -> Vec<usize> {
        let k = match self.shape {
            Shape::Box { half_width } => k.min(half_width),
            _ => k,
        } as i64;
        (-k..=k)
            .filter_map(|t| {
                let mut x = vec![0i64; self.dimension.max(1)];
                x[0] = t;
                self.vertex_at(&x)
            })
            .collect()
    }

    /// Vertices with a coordinate of modulus `L` (the inner boundary of a box).
    pub fn boundary_vertices(&self) -> Vec<usize> {
        match self.shape {
            Shape::Box { half_width } => {
                let l = half_width as i64;
                self.coords
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.iter().any(|x| x.abs() == l))
                    .map(|(i, _)| i)
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Incidence lists over `num_vertices + 1` slots; the ghost sits at index
    /// `num_vertices`. Entries are `(neighbour slot, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let n = self.num_vertices;
        let mut adj = vec![Vec::new(); n + 1];
        for (i, e) in self.all_edges().enumerate() {
            let u = e.u as usize;
            let v = if e.is_ghost() { n } else { e.v as usize };
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        adj
    }

    /// Slot of an edge endpoint in arrays of length `num_vertices + 1`.
    pub fn slot(&self, v: u32) -> usize {
        if v == GHOST {
            self.num_vertices
        } else {
            v as usize
        }
    }

    pub fn describe(&self) -> String {
        let shape = match self.shape {
            Shape::Box { half_width } => format!("box d={} L={half_width}", self.dimension),
            Shape::Torus { side } => format!("torus d={} L={side}", self.dimension),
            Shape::Graph => format!("graph n={}", self.num_vertices),
        };
        format!("{shape} bc={} edges={} ghost_edges={}", self.boundary, self.edges.len(), self.ghost.len())
    }

    /// `H(sigma) = -h sum sigma_x - sum J sigma_x sigma_y - sum J(x,delta) sigma_x`.
    pub fn hamiltonian(&self, sigma: &SpinConfig) -> Result<T> {
        if sigma.len() != self.num_vertices {
            return Err(Error::Domain(format!(
                "spin configuration on {} sites, region has {}",
                sigma.len(),
                self.num_vertices
            )));
        }
        let s = |v: u32| T::from_i8(sigma.0[v as usize]).unwrap();
        let mut h = T::zero();
        for e in &self.edges {
            h = h - e.coupling * s(e.u) * s(e.v);
        }
        for e in &self.ghost {
            h = h - e.coupling * s(e.u);
        }
        let m: T = sigma.0.iter().map(|&x| T::from_i8(x).unwrap()).sum();
        Ok(h - self.field * m)
    }
}

/// `J(x, delta)` for a box vertex; tori carry no ghost.
pub fn ghost_coupling<T: Real>(model: &CouplingModel<T>, region: &Region<T>, x: usize) -> Result<T> {
    match region.shape() {
        Shape::Box { half_width } => {
            let c = region
                .coords(x)
                .ok_or_else(|| Error::Domain(format!("vertex {x} outside the region")))?;
            model.ghost_coupling_box(half_width, c)
        }
        Shape::Torus { .. } => Err(Error::Unsupported("a torus has no ghost vertex".into())),
        Shape::Graph => Ok(region.ghost_coupling_of(x as u32)),
    }
}

fn nearest_neighbor_edges<T: Real>(
    model: &CouplingModel<T>,
    coords: &[Vec<i64>],
    locate: impl Fn(&[i64]) -> Option<i64>,
) -> Vec<Edge<T>> {
    let j = model.at_distance(1);
    let mut edges = Vec::new();
    if !(j >= T::lit(COUPLING_CUTOFF)) {
        return edges;
    }
    for (i, x) in coords.iter().enumerate() {
        for axis in 0..x.len() {
            let mut y = x.clone();
            y[axis] += 1;
            if let Some(k) = locate(&y) {
                let k = k as usize;
                if k != i {
                    let (u, v) = edge_key(i as u32, k as u32);
                    edges.push(Edge { u, v, coupling: j });
                }
            }
        }
    }
    edges.sort_by_key(|e| e.key());
    edges.dedup_by_key(|e| e.key());
    edges
}

fn all_pair_edges<T: Real>(coords: &[Vec<i64>], coupling: impl Fn(&[i64], &[i64]) -> T) -> Vec<Edge<T>> {
    let cutoff = T::lit(COUPLING_CUTOFF);
    let mut edges = Vec::new();
    for i in 0..coords.len() {
        for k in i + 1..coords.len() {
            let j = coupling(&coords[i], &coords[k]);
            if j >= cutoff {
                edges.push(Edge { u: i as u32, v: k as u32, coupling: j });
            }
        }
    }
    edges
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig(pub Vec<i8>);

impl SpinConfig {
    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Configuration whose bit `i` of `mask` set means `sigma_i = -1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}
