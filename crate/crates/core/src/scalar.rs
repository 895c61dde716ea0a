//! Scalar abstraction shared by every engine.

use nalgebra as na;
use num_complex::Complex;
use num_traits as nt;

/// Real floating point type the numerics are generic over (`f32` or `f64`).
pub trait Real: Copy + Default + nt::FromPrimitive + nt::ToPrimitive + na::RealField + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    const TWO: Self;
    const HALF: Self;
    const EPSILON: Self;

    /// Converts an `f64` literal. Panics only for values outside the type's range.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("literal out of range")
    }

    #[inline]
    fn from_int(n: i64) -> Self {
        <Self as nt::FromPrimitive>::from_i64(n).expect("integer out of range")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("integer out of range")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const TWO: Self = 2.0;
            const HALF: Self = 0.5;
            const EPSILON: Self = <$f>::EPSILON;
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Complex helpers that avoid the inherent `num_complex` methods (those need `num_traits::Float`).
pub trait Cplx<T: Real>: Copy {
    fn c(re: T, im: T) -> Self;
    fn re_(self) -> T;
    fn im_(self) -> T;
    fn abs_(self) -> T;
    fn abs2(self) -> T;
    fn conj_(self) -> Self;
    fn is_finite_(self) -> bool;

    #[inline]
    fn zero_() -> Self {
        Self::c(T::ZERO, T::ZERO)
    }
    #[inline]
    fn one_() -> Self {
        Self::c(T::ONE, T::ZERO)
    }
    #[inline]
    fn i_() -> Self {
        Self::c(T::ZERO, T::ONE)
    }
    #[inline]
    fn real(x: T) -> Self {
        Self::c(x, T::ZERO)
    }
}

impl<T: Real> Cplx<T> for Complex<T> {
    #[inline]
    fn c(re: T, im: T) -> Self {
        Complex::new(re, im)
    }
    #[inline]
    fn re_(self) -> T {
        self.re
    }
    #[inline]
    fn im_(self) -> T {
        self.im
    }
    #[inline]
    fn abs_(self) -> T {
        self.re.hypot(self.im)
    }
    #[inline]
    fn abs2(self) -> T {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn conj_(self) -> Self {
        Complex::new(self.re, -self.im)
    }
    #[inline]
    fn is_finite_(self) -> bool {
        let f = |x: T| x.to_f64_lossy().is_finite();
        f(self.re) && f(self.im)
    }
}

/// Euclidean norm of a complex slice.
pub fn norm2<T: Real>(v: &[Complex<T>]) -> T {
    let mut s = T::ZERO;
    for z in v {
        s += z.abs2();
    }
    s.sqrt()
}

/// Max-modulus norm of a complex slice.
pub fn norm_inf<T: Real>(v: &[Complex<T>]) -> T {
    let mut m = T::ZERO;
    for z in v {
        let a = z.abs_();
        if !(a <= m) {
            m = a;
        }
    }
    m
}

#[inline]
pub fn cz<T: Real>() -> Complex<T> {
    Complex::new(T::ZERO, T::ZERO)
}

#[inline]
pub fn cr<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::ZERO)
}

#[inline]
pub fn ci<T: Real>() -> Complex<T> {
    Complex::new(T::ZERO, T::ONE)
}
