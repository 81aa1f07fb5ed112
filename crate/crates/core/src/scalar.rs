//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point type the library is generic over (`f32` or `f64`).
///
/// All accuracy targets quoted in the docs refer to `f64`; the `f32`
/// instantiation runs the same algorithms at single precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + rustfft::FftNum
    + 'static
{
    /// Euler-Mascheroni constant.
    fn euler_gamma() -> Self;
}

impl Real for f32 {
    fn euler_gamma() -> Self {
        0.577_215_7
    }
}

impl Real for f64 {
    fn euler_gamma() -> Self {
        0.577_215_664_901_532_9
    }
}

/// Converts an `f64` literal into the working precision.
#[inline(always)]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target float")
}

/// Converts an index or count into the working precision.
#[inline(always)]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target float")
}

#[inline(always)]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// The imaginary unit.
#[inline(always)]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}
