//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// All core math is written against this trait and instantiated at the crate
/// root with `f64`. Accuracy targets quoted in tests assume double precision.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + rustfft::FftNum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn creal<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn czero<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Cplx<T> {
    Complex::new(T::one(), T::zero())
}

/// `(e^w - 1) / w`, accurate near `w = 0`.
pub(crate) fn exprel<T: Real>(w: Cplx<T>) -> Cplx<T> {
    if w.norm() < T::lit(1e-3) {
        // 1 + w/2 + w^2/6 + w^3/24 + w^4/120
        let mut term = cone::<T>();
        let mut acc = cone::<T>();
        for k in 2..8 {
            term = term * w / T::from_usize_lossy(k);
            acc += term;
        }
        acc
    } else {
        (w.exp() - cone::<T>()) / w
    }
}

/// Uniform samples in `[-1, 1)` from a seeded ChaCha8 stream.
pub(crate) fn uniform_stream<T: Real>(seed: u64) -> impl FnMut() -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || {
        let bits = rng.next_u64() >> 11;
        T::lit(bits as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
    }
}

