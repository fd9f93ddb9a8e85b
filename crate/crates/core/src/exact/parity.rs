//! Parity-pattern sums `S(A) = sum_{r : dr = A} prod_{e in r} tanh(beta J_e)`.
//!
//! The admissible odd-edge sets for a source set `A` form a coset of the
//! cycle space of the incidence system (the ghost row is dropped, so it
//! absorbs any parity). A reduced row-echelon form over GF(2) yields one
//! particular solution and a kernel basis; the coset is then enumerated.

use rayon::prelude::*;

use crate::error::{too_large, Error, Result};
use crate::num::Real;
use crate::region::{Region, GHOST};

/// Largest kernel dimension enumerated (2^26 patterns).
pub const MAX_KERNEL_DIM: usize = 26;

#[derive(Debug, Clone)]
pub struct ParitySystem<T> {
    tanh: Vec<T>,
    log_cosh: T,
    /// Reduced rows: (edge mask, combination of original vertex equations, pivot edge).
    rows: Vec<(u64, u64, u32)>,
    /// Vertex combinations of rows that reduced to zero.
    null_rows: Vec<u64>,
    kernel: Vec<u64>,
    num_vertices: usize,
}

impl<T: Real> ParitySystem<T> {
    /// System for all edges of `region`, with the edges in `forced_even` removed.
    pub fn new(region: &Region<T>, beta: T, forced_even: &[usize]) -> Result<Self> {
        let m = region.num_edges();
        too_large("edges", m, 64)?;
        too_large("vertices", region.num_vertices(), 64)?;
        if region.field() != T::zero() {
            return Err(Error::Unsupported("parity sums do not carry an external field".into()));
        }
        let n = region.num_vertices();
        let mut tanh = Vec::with_capacity(m);
        let mut log_cosh = T::zero();
        let mut active = 0u64;
        for (i, e) in region.all_edges().enumerate() {
            let lambda = beta * e.coupling;
            log_cosh = log_cosh + lambda.cosh().ln();
            tanh.push(lambda.tanh());
            if lambda > T::zero() && !forced_even.contains(&i) {
                active |= 1 << i;
            }
        }
        let mut eqs: Vec<(u64, u64)> = (0..n).map(|v| (0u64, 1u64 << v)).collect();
        for (i, e) in region.all_edges().enumerate() {
            if active >> i & 1 == 0 {
                continue;
            }
            eqs[e.u as usize].0 |= 1 << i;
            if e.v != GHOST {
                eqs[e.v as usize].0 |= 1 << i;
            }
        }
        let mut rows: Vec<(u64, u64, u32)> = Vec::new();
        let mut null_rows = Vec::new();
        for (mut mask, mut combo) in eqs {
            for &(rm, rc, p) in &rows {
                if mask >> p & 1 == 1 {
                    mask ^= rm;
                    combo ^= rc;
                }
            }
            if mask == 0 {
                null_rows.push(combo);
                continue;
            }
            let p = mask.trailing_zeros();
            for row in rows.iter_mut() {
                if row.0 >> p & 1 == 1 {
                    row.0 ^= mask;
                    row.1 ^= combo;
                }
            }
            rows.push((mask, combo, p));
        }
        let pivots: u64 = rows.iter().fold(0, |acc, r| acc | 1 << r.2);
        let free = active & !pivots;
        let mut kernel = Vec::new();
        let mut bits = free;
        while bits != 0 {
            let f = bits.trailing_zeros();
            bits &= bits - 1;
            let mut v = 1u64 << f;
            for &(rm, _, p) in &rows {
                if rm >> f & 1 == 1 {
                    v |= 1 << p;
                }
            }
            kernel.push(v);
        }
        too_large("cycle space dimension", kernel.len(), MAX_KERNEL_DIM)?;
        Ok(Self {
            tanh,
            log_cosh,
            rows,
            null_rows,
            kernel,
            num_vertices: n,
        })
    }

    /// `sum_e ln cosh(beta J_e)` over every edge of the region.
    pub fn log_cosh(&self) -> T {
        self.log_cosh
    }

    pub fn kernel_dimension(&self) -> usize {
        self.kernel.len()
    }

    pub fn tanh(&self, e: usize) -> T {
        self.tanh[e]
    }

    /// One odd-edge set with source set `a` (a vertex bitmask), if any exists.
    pub fn particular(&self, a: u64) -> Option<u64> {
        if self.null_rows.iter().any(|c| (c & a).count_ones() % 2 == 1) {
            return None;
        }
        Some(
            self.rows
                .iter()
                .filter(|(_, c, _)| (c & a).count_ones() % 2 == 1)
                .fold(0u64, |acc, r| acc | 1 << r.2),
        )
    }

    pub fn weight(&self, mut r: u64) -> T {
        let mut w = T::one();
        while r != 0 {
            w = w * self.tanh[r.trailing_zeros() as usize];
            r &= r - 1;
        }
        w
    }

    /// `S(A)`.
    pub fn sum(&self, a: u64) -> T {
        let Some(r0) = self.particular(a) else {
            return T::zero();
        };
        let k = self.kernel.len();
        let hi = k.saturating_sub(10);
        let lo = k - hi;
        (0..1u64 << hi)
            .into_par_iter()
            .map(|h| {
                let mut base = r0;
                for (i, v) in self.kernel[lo..].iter().enumerate() {
                    if h >> i & 1 == 1 {
                        base ^= v;
                    }
                }
                let mut acc = T::zero();
                let mut r = base;
                for g in 0..1u64 << lo {
                    if g > 0 {
                        r ^= self.kernel[g.trailing_zeros() as usize];
                    }
                    acc = acc + self.weight(r);
                }
                acc
            })
            .sum()
    }

    /// Every odd-edge set with source set `a`, with its tanh weight.
    pub fn patterns(&self, a: u64) -> Vec<(u64, T)> {
        let Some(r0) = self.particular(a) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(1 << self.kernel.len());
        let mut r = r0;
        for g in 0..1u64 << self.kernel.len() {
            if g > 0 {
                r ^= self.kernel[g.trailing_zeros() as usize];
            }
            out.push((r, self.weight(r)));
        }
        out
    }

    pub fn vertex_mask(&self, vertices: impl IntoIterator<Item = u32>) -> Result<u64> {
        let mut mask = 0u64;
        for v in vertices {
            if v as usize >= self.num_vertices {
                return Err(Error::Domain(format!("source {v} is not a region vertex")));
            }
            mask ^= 1 << v;
        }
        Ok(mask)
    }
}
