use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numerical kernels are written against.
///
/// Implemented for `f32` and `f64`. Reported observables (error traces,
/// communication means) are always converted to `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Relative threshold below which an eigenvalue counts as zero.
    fn zero_eigen_tol() -> Self {
        let floor = Self::from_f64(1e-9).unwrap();
        let eps = Self::epsilon() * Self::from_f64(1e3).unwrap();
        floor.max(eps)
    }

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }

    #[inline]
    fn from_count(v: usize) -> Self {
        Self::from_usize(v).unwrap()
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}
