//! Thin wrappers over `libm` so numeric code reads like `std` float code.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `x^y`, with small integer exponents done by repeated squaring
/// (`libm::pow` is several times slower than `exp` or `log`).
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    if y == 2.0 {
        return x * x;
    }
    if y >= -16.0 && y <= 16.0 && y == libm::trunc(y) {
        powi(x, y as i32)
    } else {
        libm::pow(x, y)
    }
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    if !(-64..=64).contains(&n) {
        return libm::pow(x, n as f64);
    }
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut k = n.unsigned_abs();
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

/// `x^y` for `x > 0` as `exp(y ln x)`; relative error grows like
/// `|y ln x|` ulps, so use it only where that is small.
#[inline]
pub fn pow_via_exp(x: f64, y: f64) -> f64 {
    libm::exp(y * libm::log(x))
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `ln(tau + s)` for `s >= 0`, accurate when `tau == 1` and `s` is tiny.
#[inline]
pub fn ln_shift(tau: f64, s: f64) -> f64 {
    if tau == 1.0 {
        libm::log1p(s)
    } else {
        libm::log(tau + s)
    }
}

/// `|x|^q * sign(x)`.
#[inline]
pub fn signed_pow(x: f64, q: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x > 0.0 {
        powf(x, q)
    } else {
        -powf(-x, q)
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
