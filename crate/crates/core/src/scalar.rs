//! Scalar abstraction: every algorithm in this crate is written once over a
//! real floating-point type and instantiated at `f32` or `f64`.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + core::fmt::Debug
    + core::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand used when lowering literal constants into `T`.
#[inline]
pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("literal representable in scalar type")
}

/// `usize` lowered into `T`; grid sizes and mode indices stay well below
/// the `f32` integer limit.
#[inline]
pub(crate) fn num<T: Scalar>(v: usize) -> T {
    T::from_usize(v).expect("index representable in scalar type")
}

/// `sin(z)/z` continued through `z = 0`.
///
/// The series branch keeps full precision where direct division loses it;
/// both branches agree to machine precision at the switch point.
pub fn sinc<T: Scalar>(z: Complex<T>) -> Complex<T> {
    if z.norm() < lit::<T>(1e-2) {
        let z2 = z * z;
        let one = Complex::new(T::one(), T::zero());
        // 1 - z^2/6 + z^4/120 - z^6/5040; next term is below eps here.
        one - z2 * lit::<T>(1.0 / 6.0) + z2 * z2 * lit::<T>(1.0 / 120.0)
            - z2 * z2 * z2 * lit::<T>(1.0 / 5040.0)
    } else {
        z.sin() / z
    }
}
