//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond reading a region's edge list.

use ising_currents::region::Region;

/// Plain edge list; `None` as second endpoint is the boundary spin fixed to +1.
#[derive(Debug, Clone)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, Option<usize>, f64)>,
}

impl Graph {
    /// Edges in `region.all_edges()` order.
    pub fn of(region: &Region<f64>) -> Self {
        let edges = region
            .all_edges()
            .map(|e| (e.u as usize, (!e.is_ghost()).then_some(e.v as usize), e.coupling))
            .collect();
        Self {
            n: region.num_vertices(),
            edges,
        }
    }

    pub fn free(&self) -> Self {
        Self {
            n: self.n,
            edges: self.edges.iter().copied().filter(|e| e.1.is_some()).collect(),
        }
    }

    fn energy(&self, beta: f64, s: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v, j)| beta * j * s[u] * v.map_or(1.0, |v| s[v]))
            .sum()
    }
}

fn spins_of(mask: u64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

/// Everything read off a full spin enumeration.
#[derive(Debug, Clone)]
pub struct Spins {
    pub log_z: f64,
    pub corr: Vec<Vec<f64>>,
    pub mag: Vec<f64>,
}

pub fn spins(g: &Graph, beta: f64) -> Spins {
    let n = g.n;
    let configs: Vec<Vec<f64>> = (0..1u64 << n).map(|m| spins_of(m, n)).collect();
    let energies: Vec<f64> = configs.iter().map(|s| g.energy(beta, s)).collect();
    let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies.iter().map(|e| (e - top).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut corr = vec![vec![0.0; n]; n];
    let mut mag = vec![0.0; n];
    for (s, w) in configs.iter().zip(&weights) {
        for x in 0..n {
            mag[x] += w * s[x];
            for y in 0..n {
                corr[x][y] += w * s[x] * s[y];
            }
        }
    }
    mag.iter_mut().for_each(|m| *m /= z);
    corr.iter_mut().flatten().for_each(|c| *c /= z);
    Spins {
        log_z: top + z.ln(),
        corr,
        mag,
    }
}

/// Spin average of `f` under the Gibbs weight.
pub fn spin_mean(g: &Graph, beta: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    let configs: Vec<Vec<f64>> = (0..1u64 << g.n).map(|m| spins_of(m, g.n)).collect();
    let top = configs.iter().map(|s| g.energy(beta, s)).fold(f64::NEG_INFINITY, f64::max);
    for s in &configs {
        let w = (g.energy(beta, s) - top).exp();
        num += w * f(s);
        den += w;
    }
    num / den
}

/// Odd-edge patterns with no odd vertex, each with weight
/// `prod_odd sinh(beta J) prod_even cosh(beta J)`.
fn sourceless_patterns(g: &Graph, beta: f64) -> Vec<(u64, f64)> {
    let m = g.edges.len();
    (0..1u64 << m)
        .filter(|&r| {
            let mut deg = vec![0u32; g.n];
            for (i, &(u, v, _)) in g.edges.iter().enumerate() {
                if r >> i & 1 == 1 {
                    deg[u] += 1;
                    if let Some(v) = v {
                        deg[v] += 1;
                    }
                }
            }
            deg.iter().all(|d| d % 2 == 0)
        })
        .map(|r| {
            let w = g
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let l = beta * e.2;
                    if r >> i & 1 == 1 {
                        l.sinh()
                    } else {
                        l.cosh()
                    }
                })
                .product();
            (r, w)
        })
        .collect()
}

/// `ln` of the sourceless current partition function.
pub fn log_z_currents(g: &Graph, beta: f64) -> f64 {
    sourceless_patterns(g, beta).iter().map(|p| p.1).sum::<f64>().ln()
}

/// Number of even subgraphs and their normalized law `prod_odd tanh(beta J)`.
pub fn even_subgraph_law(g: &Graph, beta: f64) -> Vec<(u64, f64)> {
    let pats = sourceless_patterns(g, beta);
    let norm: f64 = pats.iter().map(|p| p.1).sum();
    pats.into_iter().map(|(r, w)| (r, w / norm)).collect()
}

/// Probability that a sourceless current is even on every edge of `set`.
pub fn even_flux_prob(g: &Graph, beta: f64, set: &[usize]) -> f64 {
    let mask: u64 = set.iter().map(|&e| 1u64 << e).sum();
    let pats = sourceless_patterns(g, beta);
    let all: f64 = pats.iter().map(|p| p.1).sum();
    let even: f64 = pats.iter().filter(|p| p.0 & mask == 0).map(|p| p.1).sum();
    even / all
}

fn choose(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |c, i| c * u128::from(n - i) / u128::from(i + 1))
}

/// Both sides of the switching identity for the current `m` on `edges`:
/// `sum over n <= m with sources {x,y} of C(m,n)` and
/// `1[x, y joined by the support of m] * sum over sourceless n <= m of C(m,n)`.
pub fn switching_sides(n: usize, edges: &[(usize, usize)], m: &[u32], x: usize, y: usize) -> (u128, u128) {
    let mut lhs = 0u128;
    let mut empty = 0u128;
    let mut sub = vec![0u32; m.len()];
    loop {
        let mut deg = vec![0u32; n];
        let mut c = 1u128;
        for (i, &k) in sub.iter().enumerate() {
            deg[edges[i].0] += k;
            deg[edges[i].1] += k;
            c *= choose(m[i], k);
        }
        let odd: Vec<usize> = (0..n).filter(|&v| deg[v] % 2 == 1).collect();
        if odd.is_empty() {
            empty += c;
        } else if odd == [x.min(y), x.max(y)] {
            lhs += c;
        }
        let mut i = 0;
        while i < sub.len() && sub[i] == m[i] {
            sub[i] = 0;
            i += 1;
        }
        if i == sub.len() {
            break;
        }
        sub[i] += 1;
    }
    // connectivity of x and y through edges with m > 0
    let mut seen = vec![false; n];
    let mut stack = vec![x];
    seen[x] = true;
    while let Some(v) = stack.pop() {
        for (i, &(a, b)) in edges.iter().enumerate() {
            if m[i] == 0 {
                continue;
            }
            for (p, q) in [(a, b), (b, a)] {
                if p == v && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    (lhs, if seen[y] { empty } else { 0 })
}

/// Vertices joined to `x` by open lattice edges; the flag tells whether an
/// open boundary edge is reached.
pub fn open_cluster(g: &Graph, open: &[bool], x: usize) -> (Vec<bool>, bool) {
    let mut adj = vec![Vec::new(); g.n];
    let mut to_ghost = vec![false; g.n];
    for (i, &(u, v, _)) in g.edges.iter().enumerate() {
        if !open[i] {
            continue;
        }
        match v {
            Some(v) => {
                adj[u].push(v);
                adj[v].push(u);
            }
            None => to_ghost[u] = true,
        }
    }
    let mut seen = vec![false; g.n];
    seen[x] = true;
    let mut stack = vec![x];
    let mut ghost = false;
    while let Some(v) = stack.pop() {
        ghost |= to_ghost[v];
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (seen, ghost)
}

/// Spontaneous magnetization of the square-lattice model (Onsager, Yang).
pub fn onsager_magnetization(beta: f64) -> f64 {
    let s = (2.0 * beta).sinh();
    if s <= 1.0 {
        0.0
    } else {
        (1.0 - s.powi(-4)).powf(0.125)
    }
}

/// Aitken extrapolation of a geometrically converging triple.
pub fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let (d1, d2) = (b - a, c - b);
    c - d2 * d2 / (d2 - d1)
}

/// `sum_{r >= 1} 2 r^-alpha (1 - cos(p r))`: the one-dimensional power-law
/// energy by direct summation, with the tail beyond `cut` replaced by its
/// average `2 r^-alpha` integrated.
pub fn power_law_energy_1d(alpha: f64, p: f64, cut: usize) -> f64 {
    let head: f64 = (1..=cut).map(|r| 2.0 * (r as f64).powf(-alpha) * (1.0 - (p * r as f64).cos())).sum();
    let tail = 2.0 * (cut as f64 + 0.5).powf(1.0 - alpha) / (alpha - 1.0);
    head + tail
}

