//! Cluster analysis of open configurations and the order-parameter estimators.
//!
//! Clusters are formed by open lattice edges; a cluster touches the ghost
//! when one of its vertices has an open ghost edge. Vertex-to-vertex
//! connections therefore never pass through the ghost, while `x <-> delta`
//! means that the cluster of `x` touches it.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::currents::OpenConfig;
use crate::error::{Error, Result};
use crate::exact::Target;
use crate::model::CouplingModel;
use crate::num::Real;
use crate::region::{Boundary, Region, Shape};
use crate::sampler::{spin_mc_run, spin_mc_sample, worm_run_with, Algorithm, ChainConfig, Observable, WormMode};
use crate::stats::{Estimate, MultiBinner};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabels {
    /// Cluster id of each vertex, ids `0..size.len()`.
    pub label: Vec<u32>,
    pub size: Vec<u32>,
    pub touches_ghost: Vec<bool>,
    /// Whether the cluster contains a vertex of the inner boundary of the box.
    pub touches_boundary: Vec<bool>,
}

impl ClusterLabels {
    pub fn num_clusters(&self) -> usize {
        self.size.len()
    }

    pub fn connected(&self, x: u32, y: u32) -> bool {
        self.label[x as usize] == self.label[y as usize]
    }

    pub fn connected_to(&self, x: u32, target: Target) -> bool {
        match target {
            Target::Vertex(y) => self.connected(x, y),
            Target::Ghost => self.touches_ghost[self.label[x as usize] as usize],
        }
    }

    pub fn reaches_boundary(&self, x: u32) -> bool {
        self.touches_boundary[self.label[x as usize] as usize]
    }
}

/// Region data reused across configurations.
#[derive(Debug, Clone)]
pub struct Labeler {
    n: usize,
    lattice: Vec<(u32, u32)>,
    ghost: Vec<u32>,
    on_boundary: Vec<bool>,
}

impl Labeler {
    pub fn new<T: Real>(region: &Region<T>) -> Self {
        let n = region.num_vertices();
        let mut on_boundary = vec![false; n];
        for v in region.boundary_vertices() {
            on_boundary[v] = true;
        }
        Self {
            n,
            lattice: region.lattice_edges().iter().map(|e| (e.u, e.v)).collect(),
            ghost: region.ghost_edges().iter().map(|e| e.u).collect(),
            on_boundary,
        }
    }

    pub fn label(&self, open: &OpenConfig) -> ClusterLabels {
        assert_eq!(open.0.len(), self.lattice.len() + self.ghost.len(), "configuration does not match the region");
        let mut uf = UnionFind::<u32>::new(self.n);
        for (&(u, v), &o) in self.lattice.iter().zip(&open.0) {
            if o {
                uf.union(u, v);
            }
        }
        let mut id = vec![u32::MAX; self.n];
        let mut label = Vec::with_capacity(self.n);
        let mut size: Vec<u32> = Vec::new();
        let mut touches_boundary = Vec::new();
        for x in 0..self.n {
            let r = uf.find(x as u32) as usize;
            if id[r] == u32::MAX {
                id[r] = size.len() as u32;
                size.push(0);
                touches_boundary.push(false);
            }
            let c = id[r];
            label.push(c);
            size[c as usize] += 1;
            touches_boundary[c as usize] |= self.on_boundary[x];
        }
        let mut touches_ghost = vec![false; size.len()];
        for (&u, &o) in self.ghost.iter().zip(&open.0[self.lattice.len()..]) {
            if o {
                touches_ghost[label[u as usize] as usize] = true;
            }
        }
        ClusterLabels {
            label,
            size,
            touches_ghost,
            touches_boundary,
        }
    }
}

pub fn label_clusters<T: Real>(region: &Region<T>, open: &OpenConfig) -> ClusterLabels {
    Labeler::new(region).label(open)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityEntry {
    pub x: u32,
    pub target: Target,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub entries: Vec<ConnectivityEntry>,
    pub origin: u32,
    /// `P[origin <-> inner boundary of the box]`, the finite-volume proxy for
    /// a connection to infinity.
    pub origin_boundary: Estimate,
    pub samples: u64,
}

impl ConnectivityReport {
    pub fn get(&self, x: u32, target: Target) -> Option<Estimate> {
        self.entries
            .iter()
            .find(|e| e.x == x && e.target == target)
            .map(|e| e.estimate)
    }
}

/// Streaming connection frequencies.
#[derive(Debug, Clone)]
pub struct ConnectivityEstimator {
    pairs: Vec<(u32, Target)>,
    origin: u32,
    bins: MultiBinner,
    row: Vec<f64>,
}

impl ConnectivityEstimator {
    pub fn new<T: Real>(region: &Region<T>, pairs: &[(u32, Target)], expected: u64) -> Result<Self> {
        let n = region.num_vertices();
        for &(x, t) in pairs {
            let bad_target = matches!(t, Target::Vertex(y) if y as usize >= n);
            if x as usize >= n || bad_target {
                return Err(Error::Domain(format!("pair ({x}, {t:?}) outside the region")));
            }
        }
        Ok(Self {
            pairs: pairs.to_vec(),
            origin: region.center() as u32,
            bins: MultiBinner::new(pairs.len() + 1, expected, crate::stats::DEFAULT_BINS),
            row: vec![0.0; pairs.len() + 1],
        })
    }

    pub fn observe(&mut self, labels: &ClusterLabels) {
        for (r, &(x, t)) in self.row.iter_mut().zip(&self.pairs) {
            *r = f64::from(u8::from(labels.connected_to(x, t)));
        }
        *self.row.last_mut().unwrap() = f64::from(u8::from(labels.reaches_boundary(self.origin)));
        self.bins.push(&self.row);
    }

    pub fn finish(&self) -> Result<ConnectivityReport> {
        if self.bins.count() == 0 {
            return Err(Error::EmptyStream);
        }
        let k = self.pairs.len();
        Ok(ConnectivityReport {
            entries: self
                .pairs
                .iter()
                .enumerate()
                .map(|(i, &(x, target))| ConnectivityEntry {
                    x,
                    target,
                    estimate: if target == Target::Vertex(x) {
                        Estimate::exact(1.0, self.bins.count())
                    } else {
                        self.bins.component(i)
                    },
                })
                .collect(),
            origin: self.origin,
            origin_boundary: self.bins.component(k),
            samples: self.bins.count(),
        })
    }
}

pub fn connectivity_estimates<T: Real>(
    region: &Region<T>,
    stream: &[OpenConfig],
    pairs: &[(u32, Target)],
) -> Result<ConnectivityReport> {
    let labeler = Labeler::new(region);
    let mut est = ConnectivityEstimator::new(region, pairs, stream.len() as u64)?;
    for o in stream {
        est.observe(&labeler.label(o));
    }
    est.finish()
}

/// One statistical inequality `lhs <= rhs` with slack `3 sqrt(s_l^2 + s_r^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(name: impl Into<String>, lhs: Estimate, rhs: Estimate) -> Self {
        let slack = 3.0 * lhs.combined(&rhs);
        let holds = lhs.mean <= rhs.mean + slack || (lhs.mean - rhs.mean).abs() <= 1e-12;
        Self {
            name: name.into(),
            lhs,
            rhs,
            slack,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LroChainReport {
    pub block_size: usize,
    /// `(|B| P[0 <-> boundary])^2`.
    pub boundary_term: Estimate,
    /// `sum_{x,y in B} P[x <-> y]`.
    pub connection_sum: Estimate,
    /// `sum_{x,y in B} <s_x s_y>^0`.
    pub correlation_sum: Estimate,
    pub checks: Vec<InequalityCheck>,
}

impl LroChainReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Streaming terms of the chain `(|B| P[0<->bd])^2 <= sum_B P[x<->y] <= sum_B <s s>^0`.
#[derive(Debug, Clone)]
pub struct LroChainEstimator {
    block: Vec<u32>,
    origin: u32,
    bins: MultiBinner,
    counts: Vec<u32>,
}

impl LroChainEstimator {
    pub fn new<T: Real>(region: &Region<T>, block: &[usize], expected: u64) -> Result<Self> {
        let n = region.num_vertices();
        if block.is_empty() || block.iter().any(|&v| v >= n) {
            return Err(Error::Domain("block must be a nonempty subset of the region".into()));
        }
        Ok(Self {
            block: block.iter().map(|&v| v as u32).collect(),
            origin: region.center() as u32,
            bins: MultiBinner::new(2, expected, crate::stats::DEFAULT_BINS),
            counts: Vec::new(),
        })
    }

    pub fn observe(&mut self, labels: &ClusterLabels) {
        self.counts.clear();
        self.counts.resize(labels.num_clusters(), 0);
        for &x in &self.block {
            self.counts[labels.label[x as usize] as usize] += 1;
        }
        let pairs: f64 = self.counts.iter().map(|&c| f64::from(c) * f64::from(c)).sum();
        let boundary = f64::from(u8::from(labels.reaches_boundary(self.origin)));
        self.bins.push(&[boundary, pairs]);
    }

    pub fn finish(&self, correlation_sum: Estimate) -> Result<LroChainReport> {
        if self.bins.count() == 0 {
            return Err(Error::EmptyStream);
        }
        let b = self.block.len() as f64;
        let boundary_term = self.bins.estimate(|m| (b * m[0]).powi(2));
        let connection_sum = self.bins.component(1);
        Ok(LroChainReport {
            block_size: self.block.len(),
            boundary_term,
            connection_sum,
            correlation_sum,
            checks: vec![
                InequalityCheck::new("(|B| P[0<->bd])^2 <= sum P[x<->y]", boundary_term, connection_sum),
                InequalityCheck::new("sum P[x<->y] <= sum <s_x s_y>^0", connection_sum, correlation_sum),
            ],
        })
    }
}

pub fn lro_chain_check<T: Real>(
    region: &Region<T>,
    stream: &[OpenConfig],
    block: &[usize],
    correlation_sum: Estimate,
) -> Result<LroChainReport> {
    let labeler = Labeler::new(region);
    let mut est = LroChainEstimator::new(region, block, stream.len() as u64)?;
    for o in stream {
        est.observe(&labeler.label(o));
    }
    est.finish(correlation_sum)
}

/// `E[(sum_{x in B} s_x)^2] = sum_{x,y in B} <s_x s_y>` for each block, by spin Monte Carlo.
pub fn block_correlation_sums(region: &Region<f64>, cfg: &ChainConfig, blocks: &[Vec<usize>]) -> Result<Vec<Estimate>> {
    let mut bins = MultiBinner::new(blocks.len(), cfg.measurements(), cfg.bins());
    let mut row = vec![0.0; blocks.len()];
    spin_mc_sample(region, cfg, |s| {
        for (r, b) in row.iter_mut().zip(blocks) {
            let m: i64 = b.iter().map(|&x| i64::from(s[x])).sum();
            *r = (m * m) as f64;
        }
        bins.push(&row);
    })?;
    Ok((0..blocks.len()).map(|j| bins.component(j)).collect())
}

/// Opens every lattice edge with positive coupling inside `[-N,N]^d`.
pub fn phi_n_map<T: Real>(region: &Region<T>, open: &OpenConfig, n: usize) -> Result<OpenConfig> {
    if region.coords(0).is_none() && region.num_vertices() > 0 {
        return Err(Error::Domain("phi_N needs lattice coordinates".into()));
    }
    if let Shape::Box { half_width } = region.shape() {
        if n > half_width {
            return Err(Error::Domain(format!("N = {n} exceeds the box half-width {half_width}")));
        }
    }
    let inside = |v: u32| {
        region
            .coords(v as usize)
            .is_some_and(|c| c.iter().all(|x| x.unsigned_abs() <= n as u64))
    };
    let mut out = open.clone();
    for (o, e) in out.0.iter_mut().zip(region.lattice_edges()) {
        if e.coupling > T::zero() && inside(e.u) && inside(e.v) {
            *o = true;
        }
    }
    Ok(out)
}

/// Streaming frequency of configurations with at least two distinct clusters
/// that each touch the box boundary and hold at least `s |Lambda|` vertices.
#[derive(Debug, Clone)]
pub struct UniquenessEstimator {
    threshold: u32,
    bins: MultiBinner,
}

impl UniquenessEstimator {
    pub fn new<T: Real>(region: &Region<T>, s: f64, expected: u64) -> Result<Self> {
        if !(s > 0.0 && s <= 0.5) {
            return Err(Error::Domain(format!("size fraction {s} outside (0, 0.5]")));
        }
        Ok(Self {
            threshold: (s * region.num_vertices() as f64).ceil() as u32,
            bins: MultiBinner::new(1, expected, crate::stats::DEFAULT_BINS),
        })
    }

    pub fn observe(&mut self, labels: &ClusterLabels) {
        let big = labels
            .size
            .iter()
            .zip(&labels.touches_boundary)
            .filter(|(&s, &b)| b && s >= self.threshold)
            .count();
        self.bins.push(&[f64::from(u8::from(big >= 2))]);
    }

    pub fn finish(&self) -> Result<Estimate> {
        if self.bins.count() == 0 {
            return Err(Error::EmptyStream);
        }
        Ok(self.bins.component(0))
    }
}

pub fn uniqueness_diagnostic<T: Real>(region: &Region<T>, stream: &[OpenConfig], s: f64) -> Result<Estimate> {
    let labeler = Labeler::new(region);
    let mut est = UniquenessEstimator::new(region, s, stream.len() as u64)?;
    for o in stream {
        est.observe(&labeler.label(o));
    }
    est.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockFamily {
    /// Centered boxes `[-k,k]^d`.
    Boxes,
    /// Axis segments `{t e_1 : |t| <= k}`.
    AxisSegments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterReport {
    pub beta: f64,
    pub half_width: usize,
    /// Plus-boundary magnetization at the origin (pinned worm).
    pub m_star: Estimate,
    /// The same from a plus-boundary spin chain, when requested.
    pub m_star_spin: Option<Estimate>,
    pub m_lro_sq: Estimate,
    pub m_lro: Estimate,
    pub m_tilde_sq: Estimate,
    pub m_tilde: Estimate,
    pub block_family: BlockFamily,
    /// `|B_k|^-2 sum_{x,y in B_k} <s_x s_y>^0` for `k = 0..=L`.
    pub block_values: Vec<Estimate>,
    /// Block index attaining the minimum.
    pub minimizing_block: usize,
    /// `sum_{x in box} <s_0 s_x>^0`.
    pub chi: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterOptions {
    pub family: BlockFamily,
    pub spin_algorithm: Algorithm,
    pub cross_check: bool,
}

impl Default for OrderParameterOptions {
    fn default() -> Self {
        Self {
            family: BlockFamily::Boxes,
            spin_algorithm: Algorithm::SpinSw,
            cross_check: false,
        }
    }
}

/// m*, M_LRO, its block-minimum variant and the box susceptibility on
/// `[-L,L]^d`. `cfg` sets sweeps, seed and beta for every chain.
pub fn order_parameters(
    model: &CouplingModel<f64>,
    half_width: usize,
    cfg: &ChainConfig,
    options: &OrderParameterOptions,
) -> Result<OrderParameterReport> {
    let plus = Region::lattice_box(model, half_width, Boundary::Plus)?;
    let free = Region::lattice_box(model, half_width, Boundary::Free)?;
    let origin = free.center() as u32;

    let worm_cfg = ChainConfig {
        boundary: Boundary::Plus,
        algorithm: Algorithm::Worm,
        ..cfg.clone()
    };
    let m_star = if plus.has_ghost() {
        let run = worm_run_with(
            &plus,
            &worm_cfg,
            WormMode::Pinned(crate::region::GHOST),
            &[Observable::mag(origin)],
            |_| {},
        )?;
        run.series.entries[0].estimate
    } else {
        Estimate::exact(0.0, 0)
    };
    let m_star_spin = if options.cross_check {
        let spin_cfg = ChainConfig {
            boundary: Boundary::Plus,
            algorithm: options.spin_algorithm,
            ..cfg.clone()
        };
        Some(spin_mc_run(&plus, &spin_cfg, &[Observable::mag(origin)])?.series.entries[0].estimate)
    } else {
        None
    };

    let n = free.num_vertices();
    let shells = block_shells(&free, options.family);
    let sizes: Vec<f64> = (0..=half_width)
        .map(|k| shells.iter().filter(|s| s.is_some_and(|s| s <= k)).count() as f64)
        .collect();
    let spin_cfg = ChainConfig {
        boundary: Boundary::Free,
        algorithm: options.spin_algorithm,
        ..cfg.clone()
    };
    let q = half_width + 1;
    let mut bins = MultiBinner::new(q + 2, spin_cfg.measurements(), spin_cfg.bins());
    let mut shell_sum = vec![0i64; q];
    let mut row = vec![0.0; q + 2];
    spin_mc_sample(&free, &spin_cfg, |s| {
        shell_sum.iter_mut().for_each(|x| *x = 0);
        let mut total = 0i64;
        for (x, sh) in shells.iter().enumerate().take(n) {
            let v = i64::from(s[x]);
            total += v;
            if let Some(k) = sh {
                shell_sum[*k] += v;
            }
        }
        let mut acc = 0i64;
        for k in 0..q {
            acc += shell_sum[k];
            row[k] = (acc * acc) as f64 / (sizes[k] * sizes[k]);
        }
        row[q] = (total * total) as f64 / (n * n) as f64;
        row[q + 1] = (i64::from(s[origin as usize]) * total) as f64;
        bins.push(&row);
    })?;
    let block_values: Vec<Estimate> = (0..q).map(|k| bins.component(k)).collect();
    let minimizing_block = (0..q)
        .min_by(|&a, &b| block_values[a].mean.total_cmp(&block_values[b].mean))
        .unwrap_or(0);
    let root = |j: usize| bins.estimate(move |m| m[j].max(0.0).sqrt());
    Ok(OrderParameterReport {
        beta: cfg.beta,
        half_width,
        m_star,
        m_star_spin,
        m_lro_sq: bins.component(q),
        m_lro: root(q),
        m_tilde_sq: block_values[minimizing_block],
        m_tilde: root(minimizing_block),
        block_family: options.family,
        block_values,
        minimizing_block,
        chi: bins.component(q + 1),
    })
}

/// Smallest block index containing each vertex.
fn block_shells(region: &Region<f64>, family: BlockFamily) -> Vec<Option<usize>> {
    (0..region.num_vertices())
        .map(|v| {
            let c = region.coords(v)?;
            match family {
                BlockFamily::Boxes => c.iter().map(|x| x.unsigned_abs() as usize).max().or(Some(0)),
                BlockFamily::AxisSegments => c[1..]
                    .iter()
                    .all(|&x| x == 0)
                    .then(|| c[0].unsigned_abs() as usize),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingRow {
    pub separation: usize,
    pub covariance: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub rows: Vec<MixingRow>,
    /// No increase beyond two combined standard errors between consecutive
    /// positive separations.
    pub decreasing: bool,
    /// Least-squares slope of `ln |cov|` against the separation, over rows
    /// resolved at two standard errors.
    pub log_slope: Option<f64>,
}

/// `|<s_A s_{A+x}> - <s_A><s_{A+x}>|` for the bond `A = {0, e_1}` shifted by
/// `x = r e_d` (by `r e_1` in one dimension), by spin Monte Carlo on a box.
pub fn even_mixing_scan(region: &Region<f64>, cfg: &ChainConfig, separations: &[usize]) -> Result<MixingReport> {
    let Shape::Box { half_width } = region.shape() else {
        return Err(Error::Domain("mixing scan needs a box region".into()));
    };
    let d = region.dimension();
    let axis = d - 1;
    let at = |shift: usize, extra: i64| -> Result<usize> {
        let mut x = vec![0i64; d];
        x[axis] += shift as i64;
        x[0] += extra;
        region
            .vertex_at(&x)
            .ok_or_else(|| Error::Domain(format!("separation {shift} leaves the box of half-width {half_width}")))
    };
    let sites: Vec<[usize; 4]> = separations
        .iter()
        .map(|&r| Ok([at(0, 0)?, at(0, 1)?, at(r, 0)?, at(r, 1)?]))
        .collect::<Result<_>>()?;
    let k = sites.len();
    let mut bins = MultiBinner::new(3 * k, cfg.measurements(), cfg.bins());
    let mut row = vec![0.0; 3 * k];
    spin_mc_sample(region, cfg, |s| {
        for (i, q) in sites.iter().enumerate() {
            let a = f64::from(s[q[0]] * s[q[1]]);
            let b = f64::from(s[q[2]] * s[q[3]]);
            row[i] = a;
            row[k + i] = b;
            row[2 * k + i] = a * b;
        }
        bins.push(&row);
    })?;
    let rows: Vec<MixingRow> = (0..k)
        .map(|i| MixingRow {
            separation: separations[i],
            covariance: bins.estimate(|m| (m[2 * k + i] - m[i] * m[k + i]).abs()),
        })
        .collect();
    let positive: Vec<&MixingRow> = rows.iter().filter(|r| r.separation > 0).collect();
    let decreasing = positive.windows(2).all(|w| {
        let (a, b) = (w[0].covariance, w[1].covariance);
        b.mean <= a.mean + 2.0 * a.combined(&b)
    });
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.covariance.mean > 2.0 * r.covariance.stderr && r.covariance.mean > 0.0)
        .map(|r| (r.separation as f64, r.covariance.mean.ln()))
        .collect();
    let log_slope = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(MixingReport {
        rows,
        decreasing,
        log_slope,
    })
}
