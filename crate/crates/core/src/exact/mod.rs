//! Brute-force ground truth on small regions.
//!
//! Two independent routes are kept side by side: spin sums over `2^|V|`
//! configurations and parity sums over the odd-edge patterns of a current.

mod connectivity;
mod parity;
mod switching;

pub use connectivity::{
    exact_connectivity_prob, gamma_path, gamma_path_region, shortest_positive_paths, verify_gamma_sandwich,
    SandwichReport, Target,
};
pub use parity::ParitySystem;
pub use switching::{switching_table, verify_eq10, Eq10Report, SWITCHING_CAP, SWITCHING_TOTAL_LIMIT};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::currents::SourceSet;
use crate::error::{too_large, Error, Result};
use crate::num::Real;
use crate::region::Region;

pub const EXACT_REL_TOL: f64 = 1e-10;
pub const EXACT_ABS_FLOOR: f64 = 1e-14;
pub const MAX_SPIN_VERTICES: usize = 24;
pub const MAX_CURRENT_EDGES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SpinSum,
    ParitySum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReport<T> {
    pub quantity: String,
    pub value: T,
    pub method: Method,
    pub vertices: usize,
    pub edges: usize,
}

/// A correlation together with whether the pair is joined by positive couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation<T> {
    pub value: T,
    pub connected: bool,
}

/// `ln sum_sigma exp(-beta H(sigma))`, ghost and field terms included.
pub fn partition_spin<T: Real>(region: &Region<T>, beta: T) -> Result<T> {
    Ok(spin_sum(region, beta, |_| T::one())?.0)
}

/// `(ln Z, <f>)` by enumeration; `f` sees the configuration as a bitmask
/// whose bit `i` set means `sigma_i = -1`.
pub fn spin_sum<T: Real>(region: &Region<T>, beta: T, f: impl Fn(u64) -> T + Sync) -> Result<(T, T)> {
    let n = region.num_vertices();
    too_large("spin vertices", n, MAX_SPIN_VERTICES)?;
    let edges: Vec<(u32, u32, T)> = region
        .lattice_edges()
        .iter()
        .map(|e| (e.u, e.v, beta * e.coupling))
        .collect();
    let mut local = vec![beta * region.field(); n];
    for e in region.ghost_edges() {
        local[e.u as usize] = local[e.u as usize] + beta * e.coupling;
    }
    let shift = edges.iter().map(|e| e.2.abs()).sum::<T>() + local.iter().map(|h| h.abs()).sum::<T>();
    let minus_beta_h = |mask: u64| -> T {
        let mut acc = T::zero();
        for &(u, v, k) in &edges {
            if (mask >> u ^ mask >> v) & 1 == 1 {
                acc = acc - k;
            } else {
                acc = acc + k;
            }
        }
        for (i, &h) in local.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc = acc - h;
            } else {
                acc = acc + h;
            }
        }
        acc
    };
    let (z, fz) = (0..1usize << n)
        .into_par_iter()
        .with_min_len(1 << 10)
        .map(|mask| {
            let mask = mask as u64;
            let w = (minus_beta_h(mask) - shift).exp();
            (w, w * f(mask))
        })
        .reduce(|| (T::zero(), T::zero()), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((z.ln() + shift, fz / z))
}

/// All single-site means and two-point functions by one spin enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMoments<T> {
    pub log_z: T,
    pub magnetization: Vec<T>,
    pub correlation: Vec<Vec<T>>,
}

#[allow(clippy::needless_range_loop)]
pub fn spin_moments<T: Real>(region: &Region<T>, beta: T) -> Result<SpinMoments<T>> {
    let n = region.num_vertices();
    too_large("spin vertices", n, 16)?;
    let log_z = partition_spin(region, beta)?;
    let mut magnetization = Vec::with_capacity(n);
    for x in 0..n {
        magnetization.push(spin_sum(region, beta, |m| sign(m, x))?.1);
    }
    let mut correlation = vec![vec![T::one(); n]; n];
    for x in 0..n {
        for y in x + 1..n {
            let c = spin_sum(region, beta, |m| sign::<T>(m, x) * sign(m, y))?.1;
            correlation[x][y] = c;
            correlation[y][x] = c;
        }
    }
    Ok(SpinMoments {
        log_z,
        magnetization,
        correlation,
    })
}

fn sign<T: Real>(mask: u64, i: usize) -> T {
    if mask >> i & 1 == 1 {
        -T::one()
    } else {
        T::one()
    }
}

/// `ln sum_{dn = A} w_beta(n)` via parity patterns; `-inf` when no current has source set `A`.
pub fn partition_current<T: Real>(region: &Region<T>, beta: T, sources: &SourceSet) -> Result<T> {
    too_large("current edges", region.num_edges(), MAX_CURRENT_EDGES)?;
    let sys = ParitySystem::new(region, beta, &[])?;
    let a = sys.vertex_mask(sources.iter().copied())?;
    Ok(sys.log_cosh() + sys.sum(a).ln())
}

/// Correlations of one region by parity sums, sharing a single GF(2) reduction.
#[derive(Debug, Clone)]
pub struct ParityCorrelations<T> {
    sys: ParitySystem<T>,
    z_empty: T,
    components: Vec<usize>,
    ghost_component: Option<usize>,
}

impl<T: Real> ParityCorrelations<T> {
    pub fn new(region: &Region<T>, beta: T) -> Result<Self> {
        too_large("current edges", region.num_edges(), MAX_CURRENT_EDGES)?;
        let sys = ParitySystem::new(region, beta, &[])?;
        let z_empty = sys.sum(0);
        let n = region.num_vertices();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n + 1);
        for e in region.all_edges() {
            if beta * e.coupling > T::zero() {
                uf.union(e.u as usize, region.slot(e.v));
            }
        }
        let components = (0..=n).map(|i| uf.find(i)).collect::<Vec<_>>();
        let ghost_component = region.has_ghost().then(|| components[n]);
        Ok(Self {
            sys,
            z_empty,
            components,
            ghost_component,
        })
    }

    pub fn corr(&self, x: u32, y: u32) -> Result<Correlation<T>> {
        let a = self.sys.vertex_mask([x, y])?;
        let connected = self.components[x as usize] == self.components[y as usize]
            || (self.ghost_component == Some(self.components[x as usize])
                && self.ghost_component == Some(self.components[y as usize]));
        Ok(Correlation {
            value: self.sys.sum(a) / self.z_empty,
            connected,
        })
    }

    pub fn magnetization(&self, x: u32) -> Result<Correlation<T>> {
        let a = self.sys.vertex_mask([x])?;
        Ok(Correlation {
            value: self.sys.sum(a) / self.z_empty,
            connected: self.ghost_component == Some(self.components[x as usize]),
        })
    }
}

/// `<sigma_x sigma_y>` under free boundary conditions (ghost couplings ignored).
pub fn corr_free<T: Real>(region: &Region<T>, beta: T, x: u32, y: u32) -> Result<Correlation<T>> {
    ParityCorrelations::new(&region.free_view(), beta)?.corr(x, y)
}

/// `<sigma_x sigma_y>` under plus boundary conditions.
pub fn corr_plus<T: Real>(region: &Region<T>, beta: T, x: u32, y: u32) -> Result<Correlation<T>> {
    require_ghost(region)?;
    ParityCorrelations::new(region, beta)?.corr(x, y)
}

/// `<sigma_x>` under plus boundary conditions.
pub fn magnetization_plus<T: Real>(region: &Region<T>, beta: T, x: u32) -> Result<Correlation<T>> {
    require_ghost(region)?;
    ParityCorrelations::new(region, beta)?.magnetization(x)
}

fn require_ghost<T: Real>(region: &Region<T>) -> Result<()> {
    if region.has_ghost() {
        Ok(())
    } else {
        Err(Error::Unsupported("plus-boundary quantity on a region without ghost".into()))
    }
}

/// `<sigma_x sigma_y>` by spin enumeration.
pub fn spin_corr<T: Real>(region: &Region<T>, beta: T, x: u32, y: u32) -> Result<T> {
    Ok(spin_sum(region, beta, |m| sign::<T>(m, x as usize) * sign(m, y as usize))?.1)
}

pub fn spin_magnetization<T: Real>(region: &Region<T>, beta: T, x: u32) -> Result<T> {
    Ok(spin_sum(region, beta, |m| sign(m, x as usize))?.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityEventReport<T> {
    /// `S(region without E) / S(region)`.
    pub parity_sum: T,
    /// `<exp(-beta K_E)> prod_E cosh(beta J)`.
    pub spin_sum: T,
    pub agree: bool,
}

/// Probability that every edge of `edges` (indices into `all_edges`) carries
/// even flux, under the boundary condition of `region`.
pub fn parity_event_prob<T: Real>(region: &Region<T>, beta: T, edges: &[usize]) -> Result<ParityEventReport<T>> {
    too_large("spin vertices", region.num_vertices(), 20)?;
    if let Some(&bad) = edges.iter().find(|&&e| e >= region.num_edges()) {
        return Err(Error::Domain(format!("edge index {bad} out of range")));
    }
    let full = ParitySystem::new(region, beta, &[])?;
    let cut = ParitySystem::new(region, beta, edges)?;
    let parity_sum = cut.sum(0) / full.sum(0);

    let terms: Vec<(u32, Option<u32>, T)> = edges
        .iter()
        .map(|&i| {
            let e = region.edge(i);
            (e.u, (!e.is_ghost()).then_some(e.v), beta * e.coupling)
        })
        .collect();
    let cosh_prod: T = terms.iter().fold(T::one(), |acc, t| acc * t.2.cosh());
    let (_, mean) = spin_sum(region, beta, |mask| {
        let mut k = T::zero();
        for &(u, v, lambda) in &terms {
            let su: T = sign(mask, u as usize);
            let sv: T = v.map_or(T::one(), |v| sign(mask, v as usize));
            k = k + lambda * su * sv;
        }
        (-k).exp()
    })?;
    let spin_sum_value = mean * cosh_prod;
    let agree = crate::num::close(
        parity_sum,
        spin_sum_value,
        T::lit(EXACT_REL_TOL),
        T::lit(EXACT_ABS_FLOOR),
    );
    Ok(ParityEventReport {
        parity_sum,
        spin_sum: spin_sum_value,
        agree,
    })
}

/// `(1/|V|) ln Z` for each region.
pub fn pressure_small<T: Real>(regions: &[Region<T>], beta: T) -> Result<Vec<T>> {
    regions
        .iter()
        .map(|r| Ok(partition_spin(r, beta)? / T::from_usize_lossy(r.num_vertices())))
        .collect()
}
