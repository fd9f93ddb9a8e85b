//! Scalar abstraction shared by the deterministic parts of the crate.
//!
//! Model evaluation, current weights, the exact oracles and the spectral
//! routines are written against [`Real`], so they run in `f32` or `f64`.
//! The Monte Carlo samplers work in `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine-independent conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Relative comparison with an absolute floor, as used by every exact check.
pub fn close<T: Real>(a: T, b: T, rel: T, abs_floor: T) -> bool {
    if a == b {
        return true;
    }
    let diff = (a - b).abs();
    diff <= abs_floor || diff <= rel * a.abs().max(b.abs())
}

/// Relative deviation `|a-b| / max(|a|,|b|)`, zero when both vanish.
pub fn rel_dev<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_uses_floor_and_relative() {
        assert!(close(1.0, 1.0 + 1e-12, 1e-10, 1e-14));
        assert!(!close(1.0, 1.0 + 1e-8, 1e-10, 1e-14));
        assert!(close(0.0, 1e-15, 1e-10, 1e-14));
    }

    #[test]
    fn log_add_exp_matches_direct() {
        let v: f64 = log_add_exp(2.0_f64.ln(), 3.0_f64.ln());
        assert!((v - 5.0_f64.ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        let big: f64 = log_add_exp(1000.0, 1000.0);
        assert!((big - (1000.0 + 2.0_f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let v: f32 = log_add_exp(0.0f32, 0.0f32);
        assert!((v - 2.0f32.ln()).abs() < 1e-6);
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
    }
}
