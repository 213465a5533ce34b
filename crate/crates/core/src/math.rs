//! Thin wrappers over `libm` so the rest of the crate reads like `std` code.

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// Sign with `sgn(0) = 0`.
#[inline]
pub(crate) fn sgn(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(exp(c·L) - 1) / c`, continuous through `c = 0`.
#[inline]
pub(crate) fn expm1_over(c: f64, l: f64) -> f64 {
    let x = c * l;
    if x.abs() < 1e-9 {
        l * (1.0 + 0.5 * x)
    } else {
        exp_m1(x) / c
    }
}

/// `ln(1 + c·z) / c`, continuous through `c = 0`.
#[inline]
pub(crate) fn ln1p_over(c: f64, z: f64) -> f64 {
    let x = c * z;
    if x.abs() < 1e-9 {
        z * (1.0 - 0.5 * x)
    } else {
        ln_1p(x) / c
    }
}
