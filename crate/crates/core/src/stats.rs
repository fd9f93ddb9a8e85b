//! Binning error bars, jackknife ratios and chi-square goodness of fit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const DEFAULT_BINS: usize = 32;
pub const MIN_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(value: f64, n: u64) -> Self {
        Self { mean: value, stderr: 0.0, n }
    }

    /// `|mean - target| <= k stderr` (equality allowed when the error vanishes).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr + 1e-12 * target.abs().max(1e-300)
    }

    /// Combined standard error of a difference of independent estimates.
    pub fn combined(&self, other: &Estimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// Fixed-size bins for a stream whose length is known in advance.
#[derive(Debug, Clone)]
pub struct Binner {
    bin_size: u64,
    current: f64,
    filled: u64,
    bins: Vec<f64>,
    total: f64,
    n: u64,
}

impl Binner {
    pub fn new(expected: u64, bins: usize) -> Self {
        let bin_size = (expected / bins.max(1) as u64).max(1);
        Self {
            bin_size,
            current: 0.0,
            filled: 0,
            bins: Vec::with_capacity(bins + 1),
            total: 0.0,
            n: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.current += x;
        self.filled += 1;
        self.total += x;
        self.n += 1;
        if self.filled == self.bin_size {
            self.bins.push(self.current / self.bin_size as f64);
            self.current = 0.0;
            self.filled = 0;
        }
    }

    /// Bin means of the completed bins.
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn estimate(&self) -> Estimate {
        let mean = if self.n > 0 { self.total / self.n as f64 } else { f64::NAN };
        Estimate {
            mean,
            stderr: bin_stderr(&self.bins),
            n: self.n,
        }
    }
}

/// Standard error of the mean of bin averages; infinite with fewer than two bins.
pub fn bin_stderr(bins: &[f64]) -> f64 {
    let k = bins.len();
    if k < 2 {
        return f64::INFINITY;
    }
    let m = bins.iter().sum::<f64>() / k as f64;
    let var = bins.iter().map(|b| (b - m) * (b - m)).sum::<f64>() / (k - 1) as f64;
    (var / k as f64).sqrt()
}

/// Mean and binned error of a stored series, in `bins` blocks.
pub fn binned(series: &[f64], bins: usize) -> Estimate {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n.max(1) as f64;
    let size = (n / bins.max(1)).max(1);
    let means: Vec<f64> = series
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    Estimate {
        mean,
        stderr: bin_stderr(&means),
        n: n as u64,
    }
}

/// Jackknife estimate of `sum(num) / sum(den)` from per-bin sums.
pub fn jackknife_ratio(num: &[f64], den: &[f64]) -> Estimate {
    assert_eq!(num.len(), den.len());
    let k = num.len();
    let (sn, sd): (f64, f64) = (num.iter().sum(), den.iter().sum());
    let mean = sn / sd;
    if k < 2 {
        return Estimate {
            mean,
            stderr: f64::INFINITY,
            n: k as u64,
        };
    }
    let loo: Vec<f64> = (0..k).map(|i| (sn - num[i]) / (sd - den[i])).collect();
    let lm = loo.iter().sum::<f64>() / k as f64;
    let var = loo.iter().map(|x| (x - lm) * (x - lm)).sum::<f64>() * (k - 1) as f64 / k as f64;
    Estimate {
        mean,
        stderr: var.sqrt(),
        n: k as u64,
    }
}

/// Jackknife estimate of `f(column means)` from per-bin means `bins[i][j]`
/// (bin `i`, quantity `j`); bins have equal weight.
pub fn jackknife_fn(bins: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> Estimate {
    let k = bins.len();
    let q = bins.first().map_or(0, Vec::len);
    let totals: Vec<f64> = (0..q).map(|j| bins.iter().map(|b| b[j]).sum()).collect();
    let mean = f(&totals.iter().map(|t| t / k.max(1) as f64).collect::<Vec<_>>());
    if k < 2 {
        return Estimate {
            mean,
            stderr: f64::INFINITY,
            n: k as u64,
        };
    }
    let loo: Vec<f64> = bins
        .iter()
        .map(|b| {
            let m: Vec<f64> = (0..q).map(|j| (totals[j] - b[j]) / (k - 1) as f64).collect();
            f(&m)
        })
        .collect();
    let lm = loo.iter().sum::<f64>() / k as f64;
    let var = loo.iter().map(|x| (x - lm) * (x - lm)).sum::<f64>() * (k - 1) as f64 / k as f64;
    Estimate {
        mean,
        stderr: var.sqrt(),
        n: k as u64,
    }
}

/// Bins of several quantities recorded together.
#[derive(Debug, Clone)]
pub struct MultiBinner {
    bin_size: u64,
    filled: u64,
    current: Vec<f64>,
    bins: Vec<Vec<f64>>,
    n: u64,
}

impl MultiBinner {
    pub fn new(quantities: usize, expected: u64, bins: usize) -> Self {
        Self {
            bin_size: (expected / bins.max(1) as u64).max(1),
            filled: 0,
            current: vec![0.0; quantities],
            bins: Vec::with_capacity(bins + 1),
            n: 0,
        }
    }

    pub fn push(&mut self, xs: &[f64]) {
        for (c, x) in self.current.iter_mut().zip(xs) {
            *c += x;
        }
        self.filled += 1;
        self.n += 1;
        if self.filled == self.bin_size {
            let size = self.bin_size as f64;
            self.bins.push(self.current.iter().map(|c| c / size).collect());
            self.current.iter_mut().for_each(|c| *c = 0.0);
            self.filled = 0;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Per-bin means of the completed bins.
    pub fn bins(&self) -> &[Vec<f64>] {
        &self.bins
    }

    pub fn estimate(&self, f: impl Fn(&[f64]) -> f64) -> Estimate {
        let mut e = jackknife_fn(&self.bins, f);
        e.n = self.n;
        e
    }

    /// Binned estimate of quantity `j` alone.
    pub fn component(&self, j: usize) -> Estimate {
        self.estimate(|m| m[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub cells: usize,
}

/// Pearson goodness of fit of `observed` counts to `probs`. Cells whose
/// expected count is below 5 are merged (in ascending order of expectation)
/// until every merged cell reaches 5. A single remaining cell gives `p = 1`.
pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let norm: f64 = probs.iter().sum();
    let mut cells: Vec<(f64, u64)> = probs
        .iter()
        .zip(observed)
        .map(|(p, &o)| (p / norm * total as f64, o))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, u64)> = Vec::new();
    let mut acc = (0.0, 0u64);
    for c in cells {
        acc.0 += c.0;
        acc.1 += c.1;
        if acc.0 >= 5.0 {
            merged.push(acc);
            acc = (0.0, 0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => merged.push(acc),
        }
    }
    let k = merged.len();
    if k < 2 {
        return ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            cells: k,
        };
    }
    let statistic: f64 = merged
        .iter()
        .map(|&(e, o)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = k - 1;
    let p_value = ChiSquared::new(dof as f64).unwrap().sf(statistic);
    ChiSquare {
        statistic,
        dof,
        p_value,
        cells: k,
    }
}
