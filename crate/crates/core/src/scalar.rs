//! Scalar abstraction shared by the geometry, state, transform and
//! measurement modules.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the linear-algebra side of the crate is generic over.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Tolerance `x`, floored at a few hundred ulps of the type so that the
    /// same thresholds stay meaningful for `f32`.
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(256.0);
        let t = Self::lit(x);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Pairwise summation; the reduction order depends only on the length of
/// the input so results are reproducible regardless of how it was produced.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        xs.iter().fold(T::zero(), |acc, &x| acc + x)
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::two_pi();
    let mut r = x % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    if r >= two_pi {
        r -= two_pi;
    }
    r
}

/// Distance between two angles modulo 2π, in `[0, π]`.
pub fn angle_distance<T: Real>(a: T, b: T) -> T {
    let d = wrap_angle(a - b);
    if d > T::pi() {
        T::two_pi() - d
    } else {
        d
    }
}
