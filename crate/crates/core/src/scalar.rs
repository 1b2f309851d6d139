use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the numerical kernels are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// `e^{iφ}`
#[inline]
pub(crate) fn phase<T: Real>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}

/// `-x log2 x` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn xlog2x_neg<T: Real>(x: T) -> T {
    if x > T::zero() {
        -x * x.log2()
    } else {
        T::zero()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    xlog2x_neg(p) + xlog2x_neg(T::one() - p)
}
