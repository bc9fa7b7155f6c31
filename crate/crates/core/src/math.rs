//! Scalar float helpers that resolve with or without `std`.
//!
//! Under `no_std` the transcendental functions on `f64` come from `libm`
//! through the `num-traits` `Float` trait; with `std` enabled they lower to
//! the usual inherent methods.

use num_traits::Float;

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    Float::abs(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    Float::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    Float::cos(x)
}

#[inline]
pub(crate) fn acos(x: f64) -> f64 {
    Float::acos(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    Float::ln(x)
}

#[inline]
pub(crate) fn powf(x: f64, e: f64) -> f64 {
    Float::powf(x, e)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    Float::exp(x)
}

/// Clamp a computed cosine into `[0, 1]` before `acos`; rounding can push
/// singular values to `1 + O(eps)` which would otherwise yield NaN.
///
/// Values within `1e-14` of 1 snap to exactly 1 so that zero principal
/// angles round-trip exactly: `acos(1 − eps) ≈ 1.5e-8` would otherwise leak
/// square-root-of-epsilon noise into every zero angle. The snap window is
/// four orders below the `1e-10` cosine tolerance that decides intersection
/// membership, so no meaningful angle is affected.
#[inline]
pub(crate) fn clamp_cosine(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x > 1.0 - 1e-14 {
        1.0
    } else {
        x
    }
}
