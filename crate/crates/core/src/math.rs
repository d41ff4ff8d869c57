// Float helpers routed through libm so results are identical with or without std.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

/// Unit-modulus phasor `e^{j·phase}`.
#[inline]
pub(crate) fn cis(phase: f64) -> num_complex::Complex64 {
    let (s, c) = sin_cos(phase);
    num_complex::Complex64::new(c, s)
}

/// Wraps an angle into `(-π, π]`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    let mut r = libm::fmod(x, TAU);
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}
