//! Torus Fourier analysis, lattice Green functions and random-walk transience.
//!
//! Brillouin-zone integrals with the `1/E(p)` singularity at the origin are
//! split into dyadic cube shells `pi 2^-(k+1) < |p|_inf <= pi 2^-k`; each
//! shell is integrated with a tensor Gauss-Legendre rule, refined so that one
//! cell spans at most half an oscillation of the weight. A geometric tail is
//! added once successive shell ratios settle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{too_large, Error, Result};
use crate::model::CouplingModel;
use crate::region::{Boundary, Region, Shape};
use crate::sampler::{spin_mc_sample, Algorithm, ChainConfig};
use crate::stats::{Estimate, MultiBinner};

const RULE_ORDER: usize = 8;
const REL_TOL: f64 = 1e-6;
const MAX_SHELLS: usize = 200;
/// Shell ratio above which `int dp/E(p)` is treated as divergent.
const DIVERGENT_RATIO: f64 = 0.99;
/// Half-width of the band `|s - d|` where the fitted exponent alone is inconclusive.
pub const BORDERLINE_BAND: f64 = 0.05;

/// Dual torus `T_L* = (2 pi / L) Z^d` restricted to `(-pi, pi]^d`, in
/// lexicographic order of the integer labels `k`, `p = 2 pi k / L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub side: usize,
    pub dimension: usize,
    pub modes: Vec<Vec<i64>>,
}

impl MomentumGrid {
    pub fn new(side: usize, dimension: usize) -> Result<Self> {
        if side == 0 || dimension == 0 {
            return Err(Error::Domain("momentum grid needs side and dimension >= 1".into()));
        }
        let count = side
            .checked_pow(dimension as u32)
            .ok_or_else(|| Error::Domain("momentum grid too large".into()))?;
        too_large("momenta", count, 1 << 22)?;
        let s = side as i64;
        let lo = -((s - 1) / 2);
        let modes = (0..count)
            .map(|mut i| {
                let mut k = vec![0i64; dimension];
                for c in k.iter_mut().rev() {
                    *c = lo + (i % side) as i64;
                    i /= side;
                }
                k
            })
            .collect();
        Ok(Self { side, dimension, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn momentum(&self, j: usize) -> Vec<f64> {
        let scale = 2.0 * PI / self.side as f64;
        self.modes[j].iter().map(|&k| scale * k as f64).collect()
    }

    pub fn zero_index(&self) -> usize {
        self.modes.iter().position(|k| k.iter().all(|&c| c == 0)).unwrap()
    }

    /// `p . x` for integer coordinates `x`.
    pub fn phase(&self, j: usize, x: &[i64]) -> f64 {
        let dot: i64 = self.modes[j].iter().zip(x).map(|(k, c)| k * c).sum();
        2.0 * PI * (dot.rem_euclid(self.side as i64)) as f64 / self.side as f64
    }
}

fn torus_side(region: &Region<f64>) -> Result<usize> {
    match region.shape() {
        Shape::Torus { side } => Ok(side),
        _ => Err(Error::Domain("Fourier analysis needs a torus region".into())),
    }
}

/// `F^(p) = sum_x e^{i p.x} F(0,x)` with `corr` indexed by torus vertex.
pub fn dft_correlations(region: &Region<f64>, corr: &[f64], grid: &MomentumGrid) -> Result<Vec<Complex64>> {
    let side = torus_side(region)?;
    if side != grid.side || region.dimension() != grid.dimension || corr.len() != region.num_vertices() {
        return Err(Error::Domain("correlations, torus and grid do not match".into()));
    }
    Ok((0..grid.len())
        .map(|j| {
            corr.iter()
                .enumerate()
                .map(|(x, &f)| Complex64::from_polar(f, grid.phase(j, region.coords(x).unwrap())))
                .sum()
        })
        .collect())
}

/// `E_L(p) = sum_y J_L(0,y) (1 - cos p.y)` from the couplings of the torus itself.
pub fn torus_energy(region: &Region<f64>, grid: &MomentumGrid, j: usize) -> Result<f64> {
    torus_side(region)?;
    let origin = region.center() as u32;
    Ok(region
        .lattice_edges()
        .iter()
        .filter(|e| e.u == origin || e.v == origin)
        .map(|e| {
            let y = if e.u == origin { e.v } else { e.u };
            e.coupling * (1.0 - grid.phase(j, region.coords(y as usize).unwrap()).cos())
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumEntry {
    pub mode: Vec<i64>,
    pub momentum: Vec<f64>,
    pub f_hat: Estimate,
    pub f_hat_imag: Estimate,
    pub energy: f64,
    /// `1 / (2 beta E(p))`.
    pub bound: f64,
    /// `1 / (beta E(p))`, the bound for a Hamiltonian summed over ordered pairs.
    pub bound_ordered: f64,
    /// `bound + 3 sigma - F^(p)`.
    pub margin: f64,
    pub holds: bool,
    pub holds_ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfraredReport {
    pub beta: f64,
    pub side: usize,
    pub algorithm: Algorithm,
    pub samples: u64,
    pub entries: Vec<MomentumEntry>,
    /// Translation-averaged `F_L(0,x)` indexed by torus vertex.
    pub correlations: Vec<f64>,
    /// All nonzero momenta satisfy `F^ <= 1/(2 beta E) + 3 sigma`.
    pub holds: bool,
    pub holds_ordered: bool,
    pub violations: usize,
    pub violations_ordered: usize,
    pub worst_margin: f64,
    pub worst_mode: Vec<i64>,
    /// `|Im F^| < 5 sigma` at every momentum.
    pub imaginary_within_noise: bool,
    pub notes: Vec<String>,
}

/// Spin Monte Carlo measurement of `F^_L(p)` on the torus of side `side`
/// and comparison with the Gaussian-domination bound at every `p != 0`.
pub fn infrared_check(model: &CouplingModel<f64>, beta: f64, side: usize, cfg: &ChainConfig) -> Result<InfraredReport> {
    if !model.is_reflection_positive() {
        return Err(Error::Unsupported(
            "the infrared bound is only claimed for reflection-positive couplings; \
             this model is not in the reflection-positive family"
                .into(),
        ));
    }
    if model.field() != 0.0 {
        return Err(Error::Unsupported("the infrared bound needs zero field".into()));
    }
    if !cfg.algorithm.is_spin() {
        return Err(Error::Config(format!("torus correlations need a spin algorithm, not {}", cfg.algorithm)));
    }
    let region = Region::torus(model, side)?;
    let grid = MomentumGrid::new(side, model.dimension())?;
    let n = region.num_vertices();
    too_large("torus shift table", n * n, 1 << 24)?;
    let coords: Vec<Vec<i64>> = (0..n).map(|x| region.coords(x).unwrap().to_vec()).collect();
    let shift: Vec<u32> = (0..n)
        .flat_map(|x| {
            let (coords, region) = (&coords, &region);
            (0..n).map(move |y| {
                let z: Vec<i64> = coords[x].iter().zip(&coords[y]).map(|(a, b)| a + b).collect();
                region.vertex_at(&z).unwrap() as u32
            })
        })
        .collect();
    let cfg = ChainConfig {
        beta,
        boundary: Boundary::Free,
        ..cfg.clone()
    };
    let mut bins = MultiBinner::new(n, cfg.measurements(), cfg.bins());
    let mut row = vec![0.0; n];
    let (algorithm, note) = spin_mc_sample(&region, &cfg, |s| {
        for (x, r) in row.iter_mut().enumerate() {
            let t = &shift[x * n..(x + 1) * n];
            let c: i32 = s.iter().zip(t).map(|(&a, &y)| i32::from(a * s[y as usize])).sum();
            *r = f64::from(c) / n as f64;
        }
        bins.push(&row);
    })?;
    let correlations: Vec<f64> = (0..n).map(|x| bins.component(x).mean).collect();
    let zero = grid.zero_index();
    let mut entries = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let phase: Vec<f64> = coords.iter().map(|x| grid.phase(j, x)).collect();
        let (cos, sin): (Vec<f64>, Vec<f64>) = phase.iter().map(|a| (a.cos(), a.sin())).unzip();
        let f_hat = bins.estimate(|m| m.iter().zip(&cos).map(|(a, b)| a * b).sum());
        let f_hat_imag = bins.estimate(|m| m.iter().zip(&sin).map(|(a, b)| a * b).sum());
        let energy = torus_energy(&region, &grid, j)?;
        let bound = 0.5 / (beta * energy);
        let bound_ordered = 1.0 / (beta * energy);
        let slack = 3.0 * f_hat.stderr;
        let margin = bound + slack - f_hat.mean;
        entries.push(MomentumEntry {
            mode: grid.modes[j].clone(),
            momentum: grid.momentum(j),
            f_hat,
            f_hat_imag,
            energy,
            bound,
            bound_ordered,
            margin,
            holds: j == zero || margin >= 0.0,
            holds_ordered: j == zero || bound_ordered + slack >= f_hat.mean,
        });
    }
    let nonzero = || entries.iter().enumerate().filter(|(j, _)| *j != zero).map(|(_, e)| e);
    let worst = nonzero().min_by(|a, b| a.margin.total_cmp(&b.margin));
    let (worst_margin, worst_mode) = worst.map_or((f64::INFINITY, Vec::new()), |e| (e.margin, e.mode.clone()));
    let violations = nonzero().filter(|e| !e.holds).count();
    let violations_ordered = nonzero().filter(|e| !e.holds_ordered).count();
    let imaginary_within_noise = entries
        .iter()
        .all(|e| e.f_hat_imag.mean.abs() <= 5.0 * e.f_hat_imag.stderr + 1e-12);
    Ok(InfraredReport {
        beta,
        side,
        algorithm,
        samples: bins.count(),
        correlations,
        holds: violations == 0,
        holds_ordered: violations_ordered == 0,
        violations,
        violations_ordered,
        worst_margin,
        worst_mode,
        imaginary_within_noise,
        entries,
        notes: note.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeTrend {
    /// `(L, L^-d F^_L(0))`.
    pub rows: Vec<(usize, Estimate)>,
    pub decreasing: bool,
}

/// `L^-d F^_L(0) = <(sum_x s_x)^2> / L^{2d}` on tori of the given sides.
pub fn zero_mode_trend(model: &CouplingModel<f64>, beta: f64, sides: &[usize], cfg: &ChainConfig) -> Result<ZeroModeTrend> {
    let cfg = ChainConfig {
        beta,
        boundary: Boundary::Free,
        ..cfg.clone()
    };
    let rows = sides
        .iter()
        .map(|&side| {
            let region = Region::torus(model, side)?;
            let n = region.num_vertices() as f64;
            let mut bins = MultiBinner::new(1, cfg.measurements(), cfg.bins());
            spin_mc_sample(&region, &cfg, |s| {
                let m: i64 = s.iter().map(|&x| i64::from(x)).sum();
                bins.push(&[(m * m) as f64 / (n * n)]);
            })?;
            Ok((side, bins.component(0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows.windows(2).all(|w| {
        let (a, b) = (w[0].1, w[1].1);
        b.mean <= a.mean + 3.0 * a.combined(&b)
    });
    Ok(ZeroModeTrend { rows, decreasing })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Volume {
    Torus(usize),
    Infinite,
}

/// `G(x,y)`: on the torus `L^-d sum_{p != 0} e^{ip.(x-y)} / E(p)`, in infinite
/// volume `int e^{ip.(x-y)} / E(p) dp / (2 pi)^d`.
pub fn green_function(model: &CouplingModel<f64>, x: &[i64], y: &[i64], volume: Volume) -> Result<f64> {
    let d = model.dimension();
    if x.len() != d || y.len() != d {
        return Err(Error::Domain("point dimension does not match the model".into()));
    }
    let r: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - b) as f64).collect();
    match volume {
        Volume::Torus(side) => {
            let grid = MomentumGrid::new(side, d)?;
            let zero = grid.zero_index();
            let sum: f64 = (0..grid.len())
                .into_par_iter()
                .filter(|&j| j != zero)
                .map(|j| {
                    let p = grid.momentum(j);
                    let dot: f64 = p.iter().zip(&r).map(|(a, b)| a * b).sum();
                    dot.cos() / model.energy(&p)
                })
                .sum();
            Ok(sum / grid.len() as f64)
        }
        Volume::Infinite => {
            let freq = r.iter().map(|c| c.abs()).fold(0.0, f64::max);
            brillouin_integral(model, freq, |p| {
                let dot: f64 = p.iter().zip(&r).map(|(a, b)| a * b).sum();
                dot.cos()
            })
        }
    }
}

/// `|Lambda_n|^-2 sum_{x,y in Lambda_n} G(x,y)`, computed as the integral of
/// the squared normalized Dirichlet kernel against `1/E(p)`.
pub fn block_average_green(model: &CouplingModel<f64>, n: usize) -> Result<f64> {
    let w = (2 * n + 1) as f64;
    brillouin_integral(model, 2.0 * n as f64, |p| {
        p.iter()
            .map(|&q| {
                let s = (0.5 * q).sin();
                if s.abs() < 1e-12 {
                    1.0
                } else {
                    let k = (0.5 * w * q).sin() / (w * s);
                    k * k
                }
            })
            .product()
    })
}

/// Transition probability `J(x,y) / |J|` of the walk driven by the couplings.
pub fn rw_transition(model: &CouplingModel<f64>, x: &[i64], y: &[i64]) -> Result<f64> {
    let total = model.total_coupling();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidModel(format!("|J| = {total} does not define a walk")));
    }
    if x == y {
        if x.len() != model.dimension() {
            return Err(Error::Domain("point dimension does not match the model".into()));
        }
        return Ok(0.0);
    }
    Ok(model.coupling(x, y)? / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transience {
    Transient,
    Recurrent,
    Borderline,
}

impl std::fmt::Display for Transience {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Transient => "transient",
            Self::Recurrent => "recurrent",
            Self::Borderline => "borderline",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransienceReport {
    pub dimension: usize,
    /// Fitted `s` in `E(p) ~ c |p|^s` along the first axis.
    pub exponent: f64,
    pub prefactor: f64,
    pub fit_points: Vec<(f64, f64)>,
    /// Contributions of successive shells to `int dp / E(p)`.
    pub shell_increments: Vec<f64>,
    pub growth_ratio: f64,
    pub integral_bounded: bool,
    pub verdict: Transience,
}

/// Transient iff `int dp / E(p) < inf`. The exponent fit decides outside the
/// band `|s - d| < 0.05`; inside it the shell growth test decides between
/// recurrent and borderline. Disagreement is reported as borderline.
pub fn transience_classify(model: &CouplingModel<f64>) -> Result<TransienceReport> {
    let d = model.dimension();
    let fit_points: Vec<(f64, f64)> = (10..=18)
        .map(|k| {
            let q = 0.5f64.powi(k);
            let mut p = vec![0.0; d];
            p[0] = q;
            (q, model.energy(&p))
        })
        .collect();
    if fit_points.iter().any(|&(_, e)| !(e.is_finite() && e > 0.0)) {
        return Err(Error::InvalidModel("E(p) is not positive near p = 0".into()));
    }
    let logs: Vec<(f64, f64)> = fit_points.iter().map(|&(q, e)| (q.ln(), e.ln())).collect();
    let (slope, intercept) = least_squares(&logs);
    let shell_increments: Vec<f64> = (0..24)
        .map(|k| shell_integral(model, PI * 0.5f64.powi(k), 0.0, &|_| 1.0) / (2.0 * PI).powi(d as i32))
        .collect();
    let tail = &shell_increments[shell_increments.len() - 4..];
    let growth_ratio = tail.windows(2).map(|w| w[1] / w[0]).sum::<f64>() / (tail.len() - 1) as f64;
    let integral_bounded = growth_ratio < DIVERGENT_RATIO;
    let df = d as f64;
    let verdict = if slope < df - BORDERLINE_BAND {
        if integral_bounded {
            Transience::Transient
        } else {
            Transience::Borderline
        }
    } else if integral_bounded {
        Transience::Borderline
    } else {
        Transience::Recurrent
    };
    Ok(TransienceReport {
        dimension: d,
        exponent: slope,
        prefactor: intercept.exp(),
        fit_points,
        shell_increments,
        growth_ratio,
        integral_bounded,
        verdict,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `int weight(p) / E(p) dp / (2 pi)^d` over the Brillouin zone; `freq`
/// bounds the angular frequency of `weight` along any axis.
fn brillouin_integral(model: &CouplingModel<f64>, freq: f64, weight: impl Fn(&[f64]) -> f64 + Sync) -> Result<f64> {
    let d = model.dimension();
    let norm = (2.0 * PI).powi(d as i32);
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    for k in 0..MAX_SHELLS {
        let a = PI * 0.5f64.powi(k as i32);
        let c = shell_integral(model, a, freq, &weight) / norm;
        total += c;
        let resolved = k >= 4 && a * freq.max(1.0) <= 1.0;
        if let (true, Some(pc)) = (resolved, prev) {
            let r = c / pc;
            if k >= 12 && r > DIVERGENT_RATIO {
                return Err(Error::Divergent(format!("shell ratio {r:.4} near p = 0")));
            }
            if r > 0.0 && r < 1.0 {
                let tail = c * r / (1.0 - r);
                let settled = prev_ratio.is_some_and(|pr: f64| k >= 12 && (r - pr).abs() < 1e-5);
                if tail.abs() <= REL_TOL * (total + tail).abs() || settled {
                    return Ok(total + tail);
                }
            } else if c == 0.0 {
                return Ok(total);
            }
            prev_ratio = Some(r);
        }
        prev = Some(c);
    }
    Err(Error::Divergent("shells did not converge".into()))
}

/// Integral over `[-a,a]^d \ [-a/2,a/2]^d`, split into `4^d - 2^d` cubes of side `a/2`.
fn shell_integral(model: &CouplingModel<f64>, a: f64, freq: f64, weight: &(impl Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let d = model.dimension();
    let side = 0.5 * a;
    let cells = ((side * freq / PI).ceil() as usize).max(1);
    let cubes: Vec<Vec<f64>> = (0..4usize.pow(d as u32))
        .filter_map(|mut idx| {
            let mut lo = vec![0.0; d];
            let mut central = true;
            for c in lo.iter_mut() {
                let i = idx % 4;
                idx /= 4;
                central &= i == 1 || i == 2;
                *c = -a + side * i as f64;
            }
            (!central).then_some(lo)
        })
        .collect();
    let (nodes, weights) = gauss_legendre(RULE_ORDER);
    let h = side / cells as f64;
    let (xs, ws): (Vec<f64>, Vec<f64>) = (0..cells)
        .flat_map(|c| {
            nodes
                .iter()
                .zip(&weights)
                .map(move |(t, w)| (h * (c as f64 + 0.5 * (t + 1.0)), 0.5 * h * w))
        })
        .unzip();
    cubes
        .par_iter()
        .map(|lo| {
            let m = xs.len();
            let mut idx = vec![0usize; d];
            let mut p: Vec<f64> = lo.iter().map(|l| l + xs[0]).collect();
            let mut sum = 0.0;
            loop {
                let w: f64 = idx.iter().map(|&i| ws[i]).product();
                sum += w * weight(&p) / model.energy(&p);
                let mut axis = 0;
                loop {
                    if axis == d {
                        return sum;
                    }
                    idx[axis] += 1;
                    if idx[axis] < m {
                        p[axis] = lo[axis] + xs[idx[axis]];
                        break;
                    }
                    idx[axis] = 0;
                    p[axis] = lo[axis] + xs[0];
                    axis += 1;
                }
            }
        })
        .sum()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Aggregate output of the `spectral` subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub infrared: Option<InfraredReport>,
    pub green: Vec<GreenEntry>,
    pub block_averages: Vec<(usize, f64)>,
    pub transience: Option<TransienceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenEntry {
    pub displacement: Vec<i64>,
    pub volume: Volume,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use crate::sampler::Algorithm;
    use proptest::prelude::*;

    fn power(d: usize, alpha: f64) -> CouplingModel<f64> {
        CouplingModel::power_law(d, alpha).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(RULE_ORDER);
        for deg in 0..(2 * RULE_ORDER) as i32 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 0 { 2.0 / (deg + 1) as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn grid_layout() {
        let g = MomentumGrid::new(8, 2).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.modes.iter().filter(|k| k.iter().all(|&c| c == 0)).count(), 1);
        assert_eq!(g.modes[0], vec![-3, -3]);
        assert_eq!(g.modes[63], vec![4, 4]);
        assert!(g.momentum(63).iter().all(|&p| (p - PI).abs() < 1e-15));
        let g = MomentumGrid::new(5, 1).unwrap();
        assert_eq!(g.modes, vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn dft_against_direct_sum() {
        let model = CouplingModel::nearest_neighbor(1);
        let r = Region::torus(&model, 4).unwrap();
        let g = MomentumGrid::new(4, 1).unwrap();
        let f = [1.0, 0.5, 0.25, 0.5];
        let out = dft_correlations(&r, &f, &g).unwrap();
        // p = -pi/2, 0, pi/2, pi
        let expect = [0.75, 2.25, 0.75, 0.25];
        for (o, e) in out.iter().zip(expect) {
            assert!((o.re - e).abs() < 1e-14 && o.im.abs() < 1e-14, "{o} vs {e}");
        }
        let delta = [1.0, 0.0, 0.0, 0.0];
        assert!(dft_correlations(&r, &delta, &g).unwrap().iter().all(|c| (c.re - 1.0).abs() < 1e-15));
        let bx = Region::lattice_box(&model, 2, Boundary::Free).unwrap();
        assert!(dft_correlations(&bx, &[0.0; 5], &MomentumGrid::new(5, 1).unwrap()).is_err());
    }

    #[test]
    fn torus_energy_matches_the_model_for_nearest_neighbors() {
        let model = CouplingModel::nearest_neighbor(2);
        let r = Region::torus(&model, 6).unwrap();
        let g = MomentumGrid::new(6, 2).unwrap();
        for j in 0..g.len() {
            let e = torus_energy(&r, &g, j).unwrap();
            assert!((e - model.energy(&g.momentum(j))).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn energy_is_even(p in prop::collection::vec(-PI..PI, 2)) {
            for model in [CouplingModel::nearest_neighbor(2), power(2, 3.5)] {
                let q: Vec<f64> = p.iter().map(|x| -x).collect();
                prop_assert!((model.energy(&p) - model.energy(&q)).abs() <= 1e-12 * model.energy(&p).max(1.0));
            }
        }

        #[test]
        fn torus_green_depends_on_the_difference(x in prop::collection::vec(-5i64..5, 2), y in prop::collection::vec(-5i64..5, 2), s in prop::collection::vec(-5i64..5, 2)) {
            let model = CouplingModel::nearest_neighbor(2);
            let a = green_function(&model, &x, &y, Volume::Torus(6)).unwrap();
            let xs: Vec<i64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
            let ys: Vec<i64> = y.iter().zip(&s).map(|(a, b)| a + b).collect();
            let b = green_function(&model, &xs, &ys, Volume::Torus(6)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_green_is_the_direct_sum() {
        let model = CouplingModel::nearest_neighbor(1);
        // L = 4: p in {pi/2, pi, -pi/2}, E = 2, 4, 2
        let g0 = green_function(&model, &[0], &[0], Volume::Torus(4)).unwrap();
        assert!((g0 - (0.5 + 0.25 + 0.5) / 4.0).abs() < 1e-15);
        let g1 = green_function(&model, &[1], &[0], Volume::Torus(4)).unwrap();
        assert!((g1 - (0.0 - 0.25 + 0.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional_green_function_matches_extrapolated_tori() {
        let model = CouplingModel::nearest_neighbor(3);
        let g: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&l| green_function(&model, &[0; 3], &[0; 3], Volume::Torus(l)).unwrap())
            .collect();
        // G_L = G - a/L + O(L^-3)
        let extrapolated = 2.0 * g[2] - g[1];
        let coarse = 2.0 * g[1] - g[0];
        let inf = green_function(&model, &[0; 3], &[0; 3], Volume::Infinite).unwrap();
        assert!((extrapolated - inf).abs() < (coarse - extrapolated).abs().max(1e-4), "{g:?} {inf}");
        assert!((extrapolated - inf).abs() < 1e-3 * inf);
    }

    #[test]
    fn recurrent_integrals_diverge() {
        let e = green_function(&CouplingModel::nearest_neighbor(2), &[0, 0], &[0, 0], Volume::Infinite);
        assert!(e.unwrap_err().to_string().starts_with("integral diverges"));
        assert!(block_average_green(&power(1, 2.0), 1).is_err());
        assert!(green_function(&CouplingModel::nearest_neighbor(1), &[0], &[0], Volume::Infinite).is_err());
    }

    #[test]
    fn off_diagonal_green_in_one_dimension() {
        // 1D power law alpha = 1.5: G(0) - G(r) is finite and positive
        let m = power(1, 1.5);
        let g0 = green_function(&m, &[0], &[0], Volume::Infinite).unwrap();
        let g3 = green_function(&m, &[3], &[0], Volume::Infinite).unwrap();
        assert!(g0 > g3 && g3 > 0.0);
        // torus sums approach the infinite-volume value
        let l = green_function(&m, &[0], &[0], Volume::Torus(4096)).unwrap();
        assert!((l - g0).abs() < 0.05 * g0, "{l} vs {g0}");
    }

    #[test]
    fn block_averages_reduce_to_pair_sums() {
        let model = CouplingModel::nearest_neighbor(3);
        let g00 = green_function(&model, &[0; 3], &[0; 3], Volume::Infinite).unwrap();
        assert!((block_average_green(&model, 0).unwrap() - g00).abs() < 1e-6 * g00);
        // n = 1: average of G over displacement pairs in {-1,0,1}^3
        let mut cache = std::collections::HashMap::new();
        let mut total = 0.0;
        let pts: Vec<Vec<i64>> = crate::model::box_points(3, 1).collect();
        for x in &pts {
            for y in &pts {
                let mut r: Vec<i64> = x.iter().zip(y).map(|(a, b)| (a - b).abs()).collect();
                r.sort_unstable();
                let g = *cache
                    .entry(r.clone())
                    .or_insert_with(|| green_function(&model, &r, &[0; 3], Volume::Infinite).unwrap());
                total += g;
            }
        }
        let direct = total / 729.0;
        let b1 = block_average_green(&model, 1).unwrap();
        assert!((b1 - direct).abs() < 1e-5 * direct, "{b1} vs {direct}");
    }

    #[test]
    fn block_averages_decrease() {
        for model in [CouplingModel::nearest_neighbor(3), power(1, 1.5)] {
            let seq: Vec<f64> = [2, 4, 8].iter().map(|&n| block_average_green(&model, n).unwrap()).collect();
            assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
            assert!(seq[2] > 0.0);
        }
    }

    #[test]
    fn transience_verdicts() {
        let cases = [
            (CouplingModel::nearest_neighbor(3), Transience::Transient, 2.0),
            (CouplingModel::nearest_neighbor(2), Transience::Recurrent, 2.0),
            (power(1, 1.5), Transience::Transient, 0.5),
            (power(1, 2.0), Transience::Recurrent, 1.0),
            (CouplingModel::exponential(2, 1.0).unwrap(), Transience::Recurrent, 2.0),
        ];
        for (model, verdict, s) in cases {
            let rep = transience_classify(&model).unwrap();
            assert_eq!(rep.verdict, verdict, "{rep:?}");
            assert!((rep.exponent - s).abs() < 0.02, "{} vs {s}", rep.exponent);
        }
        let mixed = CouplingModel::new(
            1,
            vec![Term::new(crate::model::Kernel::NearestNeighbor, 1.0), Term::new(crate::model::Kernel::PowerLaw { alpha: 1.6 }, 0.2)],
            0.0,
        )
        .unwrap();
        assert_eq!(transience_classify(&mixed).unwrap().verdict, Transience::Transient);
    }

    #[test]
    fn walk_transitions() {
        let m = CouplingModel::nearest_neighbor(1);
        assert!((rw_transition(&m, &[0], &[1]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rw_transition(&m, &[0], &[0]).unwrap(), 0.0);
        let m = CouplingModel::nearest_neighbor(2);
        assert!((rw_transition(&m, &[0, 0], &[0, -1]).unwrap() - 0.25).abs() < 1e-15);
        // zeta(2) by partial sums with an integral tail
        let k = 100_000u64;
        let zeta2 = (1..=k).map(|n| 1.0 / (n * n) as f64).sum::<f64>() + 1.0 / k as f64 - 0.5 / (k * k) as f64;
        let p = rw_transition(&power(1, 2.0), &[0], &[1]).unwrap();
        assert!((p - 1.0 / (2.0 * zeta2)).abs() < 1e-9, "{p}");
        assert!((p - 3.0 / (PI * PI)).abs() < 1e-9);
        let divergent = CouplingModel::new_unchecked(1, vec![Term::new(crate::model::Kernel::PowerLaw { alpha: 0.8 }, 1.0)], 0.0);
        assert!(rw_transition(&divergent, &[0], &[1]).is_err());
    }

    #[test]
    fn infrared_at_small_beta() {
        let model = CouplingModel::nearest_neighbor(2);
        let cfg = ChainConfig::new(0.05, Boundary::Free, 4000, 3).with_algorithm(Algorithm::SpinSw);
        let rep = infrared_check(&model, 0.05, 4, &cfg).unwrap();
        assert!(rep.holds && rep.holds_ordered);
        assert_eq!(rep.entries.len(), 16);
        assert!(rep.imaginary_within_noise);
        assert!((rep.correlations[0] - 1.0).abs() < 1e-12);
        // beta = 0: F^ = 1 exactly
        let cfg = ChainConfig::new(0.0, Boundary::Free, 400, 3).with_algorithm(Algorithm::SpinMetropolis);
        let rep = infrared_check(&model, 0.0, 4, &cfg).unwrap();
        let mean = rep.entries.iter().map(|e| e.f_hat.mean).sum::<f64>() / 16.0;
        assert!((mean - 1.0).abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn infrared_refuses_models_outside_the_family() {
        let model = CouplingModel::nearest_neighbor(2).with_reflection_positive(false);
        let cfg = ChainConfig::new(0.1, Boundary::Free, 400, 3).with_algorithm(Algorithm::SpinSw);
        assert!(matches!(infrared_check(&model, 0.1, 4, &cfg), Err(Error::Unsupported(_))));
        let field = CouplingModel::nearest_neighbor(2).with_field(0.1);
        assert!(infrared_check(&field, 0.1, 4, &cfg).is_err());
    }

    #[test]
    fn infrared_in_one_dimension_with_long_range_couplings() {
        let model = power(1, 1.5);
        let cfg = ChainConfig::new(0.05, Boundary::Free, 3000, 5).with_algorithm(Algorithm::SpinSw);
        let rep = infrared_check(&model, 0.05, 32, &cfg).unwrap();
        assert!(rep.holds, "{:?}", rep.worst_margin);
    }

    #[test]
    fn zero_mode_decreases_at_high_temperature() {
        let model = CouplingModel::nearest_neighbor(2);
        let cfg = ChainConfig::new(0.3, Boundary::Free, 4000, 12).with_algorithm(Algorithm::SpinSw);
        let trend = zero_mode_trend(&model, 0.3, &[4, 8, 12], &cfg).unwrap();
        assert!(trend.decreasing, "{:?}", trend.rows);
    }
}
