//! Scalar abstraction shared by the confidence bounds, instances and algorithms.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Ordered ring scalar: enough for sums, differences and comparisons.
///
/// Implemented for `f32`, `f64` and exact types such as `Rational64`, so gap
/// and oracle computations can be checked in exact arithmetic.
pub trait Scalar: Num + PartialOrd + Copy + Debug {}

impl<T: Num + PartialOrd + Copy + Debug> Scalar for T {}

/// Floating point scalar (`f32` or `f64`) the sampling code is generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self;

    /// Lossy conversion from a count.
    fn of_count(n: u64) -> Self;

    fn as_f64(self) -> f64;

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U[0, 1).
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn of_count(n: u64) -> Self {
                n as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }
        }
    )*};
}

impl_real!(f32, f64);
