//! Scalar abstraction shared by every numerical module.
//!
//! All physics code is written against [`Real`], implemented for `f32` and
//! `f64`. Complex amplitudes are `num_complex::Complex<T>` as re-exported by
//! nalgebra, which keeps the linear-algebra routines (eigendecomposition,
//! matrix exponential) available for both precisions.

use std::fmt::{Debug, Display, LowerExp};

pub use nalgebra::Complex;
use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Debug + Display + Send + Sync
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }

    #[inline]
    fn is_finite_val(self) -> bool {
        self.to_f64_lossy().is_finite()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for building a complex number.
#[inline]
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Purely real complex number.
#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn abs_c<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// A tolerance quoted for double precision, widened to what the scalar type
/// can actually resolve.
pub fn tolerance<T: Real>(f64_tol: f64) -> T {
    let floor = T::default_epsilon() * T::lit(1.0e3);
    let t = T::lit(f64_tol);
    if t > floor {
        t
    } else {
        floor
    }
}
