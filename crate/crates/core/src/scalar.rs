//! Scalar abstractions.
//!
//! Lattice transforms only need ring operations, so they accept any
//! [`Ring`] (including exact rationals). Everything that takes logarithms,
//! exponentials or square roots requires [`Real`].

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, NumAssign};

/// Exact or inexact commutative ring with a total enough structure for table math.
pub trait Ring: Num + NumAssign + Copy + Debug + FromPrimitive + PartialOrd {}
impl<T: Num + NumAssign + Copy + Debug + FromPrimitive + PartialOrd> Ring for T {}

/// Floating point scalar: f32 or f64.
pub trait Real: Float + Ring + Send + Sync + 'static {
    /// Lossy conversion from `f64`, used for constants.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real converts to f64")
    }
}
impl Real for f32 {}
impl Real for f64 {}

/// Small integer to scalar.
#[inline]
pub(crate) fn from_usize<T: Ring>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

/// Numerically stable `ln Σ exp(x_i)`.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// Logistic sigmoid, evaluated without overflow for either sign.
#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_is_shift_stable() {
        let xs = [1000.0_f64, 1000.0];
        assert!((log_sum_exp(&xs) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let ys = [-1000.0_f64, -1000.0 + 2f64.ln()];
        assert!((log_sum_exp(&ys) - (-1000.0 + 3f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn sigmoid_extremes() {
        assert_eq!(sigmoid(0.0_f64), 0.5);
        assert!(sigmoid(800.0_f64) == 1.0);
        assert!(sigmoid(-800.0_f64) >= 0.0);
        assert!((sigmoid(9f64.ln()) - 0.9).abs() < 1e-15);
        assert!((sigmoid(2.0_f32) - 0.880_797).abs() < 1e-6);
    }
}
