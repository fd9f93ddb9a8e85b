//! Exact nearest-neighbour correlations on `width x length` strips of `Z^2`
//! by column transfer matrices.
//!
//! The transfer step is applied site by site, `O(w 2^w)` per column. A
//! periodic longitudinal direction needs all powers of the transfer matrix
//! and is limited to `w <= 8`.

use serde::{Deserialize, Serialize};

use crate::error::{too_large, Error, Result};
use crate::num::Real;

pub const MAX_STRIP_WIDTH: usize = 10;
pub const MAX_PERIODIC_WIDTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripSpec<T> {
    pub width: usize,
    pub length: usize,
    pub beta: T,
    pub vertical: Direction,
    pub longitudinal: Direction,
    /// Plus spins beyond every open side.
    pub plus: bool,
}

impl<T: Real> StripSpec<T> {
    pub fn strip(width: usize, length: usize, beta: T) -> Self {
        Self {
            width,
            length,
            beta,
            vertical: Direction::Open,
            longitudinal: Direction::Open,
            plus: false,
        }
    }

    pub fn torus(side: usize, beta: T) -> Self {
        Self {
            width: side,
            length: side,
            beta,
            vertical: Direction::Periodic,
            longitudinal: Direction::Periodic,
            plus: false,
        }
    }

    /// The box `[-L,L]^2` with plus boundary conditions.
    pub fn plus_box(half_width: usize, beta: T) -> Self {
        Self {
            width: 2 * half_width + 1,
            length: 2 * half_width + 1,
            beta,
            vertical: Direction::Open,
            longitudinal: Direction::Open,
            plus: true,
        }
    }
}

/// A site as `(column, row)`.
pub type Site = (usize, usize);

#[derive(Debug, Clone)]
pub struct StripSolution<T> {
    spec: StripSpec<T>,
    bond: (T, T),
    scale: T,
    columns: Vec<Vec<T>>,
    kind: Kind<T>,
}

#[derive(Debug, Clone)]
enum Kind<T> {
    Open { left: Vec<Vec<T>>, right: Vec<Vec<T>>, z: T },
    Periodic { powers: Vec<Vec<Vec<T>>>, z: T },
}

fn spin<T: Real>(s: usize, a: usize) -> T {
    if s >> a & 1 == 1 {
        -T::one()
    } else {
        T::one()
    }
}

/// Exact solution of the strip; query it with [`StripSolution::corr`] and
/// [`StripSolution::magnetization`].
pub fn transfer_matrix_strip<T: Real>(spec: StripSpec<T>) -> Result<StripSolution<T>> {
    let w = spec.width;
    too_large("strip width", w, MAX_STRIP_WIDTH)?;
    if w == 0 || spec.length == 0 {
        return Err(Error::Domain("empty strip".into()));
    }
    if spec.vertical == Direction::Periodic && w < 3 {
        return Err(Error::Domain("periodic width must be at least 3".into()));
    }
    if spec.longitudinal == Direction::Periodic {
        too_large("periodic strip width", w, MAX_PERIODIC_WIDTH)?;
        if spec.length < 3 {
            return Err(Error::Domain("periodic length must be at least 3".into()));
        }
    }
    let beta = spec.beta;
    let ns = 1usize << w;
    let ell = spec.length;
    let column_weight = |k: usize| -> Vec<T> {
        (0..ns)
            .map(|s| {
                let mut e = T::zero();
                for a in 0..w.saturating_sub(1) {
                    e = e + spin::<T>(s, a) * spin(s, a + 1);
                }
                if spec.vertical == Direction::Periodic {
                    e = e + spin::<T>(s, w - 1) * spin(s, 0);
                }
                if spec.plus {
                    if spec.vertical == Direction::Open {
                        e = e + spin::<T>(s, 0) + spin(s, w - 1);
                    }
                    if spec.longitudinal == Direction::Open {
                        let m: T = (0..w).map(|a| spin::<T>(s, a)).sum();
                        if k == 0 {
                            e = e + m;
                        }
                        if k == ell - 1 {
                            e = e + m;
                        }
                    }
                }
                (beta * e).exp()
            })
            .collect()
    };
    let columns: Vec<Vec<T>> = (0..ell).map(column_weight).collect();
    let dmax = columns
        .iter()
        .flat_map(|c| c.iter())
        .fold(T::zero(), |m, &x| m.max(x));
    let bond = (beta.exp(), (-beta).exp());
    let scale = (bond.0 + bond.1).powi(w as i32) * dmax;
    let mut sol = StripSolution {
        spec,
        bond,
        scale,
        columns,
        kind: Kind::Open {
            left: Vec::new(),
            right: Vec::new(),
            z: T::zero(),
        },
    };
    sol.kind = match spec.longitudinal {
        Direction::Open => {
            let mut left = Vec::with_capacity(ell);
            left.push(sol.columns[0].clone());
            for k in 1..ell {
                let v = sol.step(&left[k - 1], k);
                left.push(v);
            }
            let mut right = vec![vec![T::one(); ns]; ell];
            for k in (0..ell - 1).rev() {
                let v: Vec<T> = right[k + 1]
                    .iter()
                    .zip(&sol.columns[k + 1])
                    .map(|(r, d)| *r * *d)
                    .collect();
                right[k] = sol.apply_bonds(&v).into_iter().map(|x| x / scale).collect();
            }
            let z = dot(&left[0], &right[0]);
            Kind::Open { left, right, z }
        }
        Direction::Periodic => {
            let mut powers = Vec::with_capacity(ell + 1);
            powers.push(
                (0..ns)
                    .map(|s| (0..ns).map(|t| if s == t { T::one() } else { T::zero() }).collect())
                    .collect::<Vec<Vec<T>>>(),
            );
            for k in 1..=ell {
                let next: Vec<Vec<T>> = powers[k - 1].iter().map(|row| sol.step(row, 0)).collect();
                powers.push(next);
            }
            let z = (0..ns).map(|s| powers[ell][s][s]).sum();
            Kind::Periodic { powers, z }
        }
    };
    Ok(sol)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

impl<T: Real> StripSolution<T> {
    pub fn spec(&self) -> &StripSpec<T> {
        &self.spec
    }

    /// `(v T)(s') = sum_s v(s) exp(beta sum_a s_a s'_a)`, one site at a time.
    fn apply_bonds(&self, v: &[T]) -> Vec<T> {
        let mut out = v.to_vec();
        let (p, m) = self.bond;
        for a in 0..self.spec.width {
            let bit = 1usize << a;
            for s in 0..out.len() {
                if s & bit == 0 {
                    let (x0, x1) = (out[s], out[s | bit]);
                    out[s] = p * x0 + m * x1;
                    out[s | bit] = m * x0 + p * x1;
                }
            }
        }
        out
    }

    fn step(&self, v: &[T], k: usize) -> Vec<T> {
        let d = &self.columns[k];
        self.apply_bonds(v)
            .into_iter()
            .zip(d)
            .map(|(x, dk)| x * *dk / self.scale)
            .collect()
    }

    fn check(&self, site: Site) -> Result<()> {
        if site.0 >= self.spec.length || site.1 >= self.spec.width {
            return Err(Error::Domain(format!("site {site:?} outside the strip")));
        }
        Ok(())
    }

    /// `<sigma_x sigma_y>`.
    pub fn corr(&self, x: Site, y: Site) -> Result<T> {
        self.check(x)?;
        self.check(y)?;
        let (x, y) = if x.0 <= y.0 { (x, y) } else { (y, x) };
        let ns = 1usize << self.spec.width;
        match &self.kind {
            Kind::Open { left, right, z } => {
                let mut v: Vec<T> = (0..ns).map(|s| left[x.0][s] * spin(s, x.1)).collect();
                for k in x.0 + 1..=y.0 {
                    v = self.step(&v, k);
                }
                let num: T = (0..ns).map(|s| v[s] * spin(s, y.1) * right[y.0][s]).sum();
                Ok(num / *z)
            }
            Kind::Periodic { powers, z } => {
                let ell = self.spec.length;
                let delta = y.0 - x.0;
                let (pa, pb) = (&powers[delta], &powers[ell - delta]);
                let mut num = T::zero();
                for s in 0..ns {
                    let sa: T = spin(s, x.1);
                    for t in 0..ns {
                        num = num + sa * pa[s][t] * spin(t, y.1) * pb[t][s];
                    }
                }
                Ok(num / *z)
            }
        }
    }

    /// `<sigma_x>`.
    pub fn magnetization(&self, x: Site) -> Result<T> {
        self.check(x)?;
        let ns = 1usize << self.spec.width;
        match &self.kind {
            Kind::Open { left, right, z } => {
                let num: T = (0..ns).map(|s| left[x.0][s] * spin(s, x.1) * right[x.0][s]).sum();
                Ok(num / *z)
            }
            Kind::Periodic { powers, z } => {
                let p = &powers[self.spec.length];
                let num: T = (0..ns).map(|s| spin::<T>(s, x.1) * p[s][s]).sum();
                Ok(num / *z)
            }
        }
    }
}
