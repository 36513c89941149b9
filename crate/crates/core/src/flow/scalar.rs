use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Arithmetic used by the flow engines: `f64` with dust tolerances, or exact
/// big rationals.
pub trait Scalar: Clone + Debug + PartialOrd + Signed + 'static {
    /// Exact for rationals (every finite `f64` is a dyadic rational).
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Flow amounts at or below this are treated as zero.
    fn dust() -> Self;
    /// Relative slack for "strictly better" and "tight" label comparisons.
    fn rel_tol() -> Self;

    /// `a < b` by more than the tolerance.
    fn clearly_less(a: &Self, b: &Self) -> bool {
        let slack = Self::rel_tol() * (Self::one() + b.abs());
        a.clone() + slack < *b
    }

    /// `a ≤ b` up to the tolerance.
    fn roughly_le(a: &Self, b: &Self) -> bool {
        let slack = Self::rel_tol() * (Self::one() + b.abs());
        *a <= b.clone() + slack
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn dust() -> Self {
        1e-12
    }

    fn rel_tol() -> Self {
        1e-12
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(x).expect("finite value")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn dust() -> Self {
        num_traits::Zero::zero()
    }

    fn rel_tol() -> Self {
        num_traits::Zero::zero()
    }
}
