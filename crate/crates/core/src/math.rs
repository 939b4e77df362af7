//! Thin wrappers over `libm` so the kernels are `no_std` and give
//! bit-identical results on every platform.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `x^k` by repeated squaring; `powi(0.0, 0) == 1.0`.
#[inline]
pub fn powi(mut x: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= x;
        }
        x *= x;
        k >>= 1;
    }
    acc
}

/// Integer power with a possibly negative exponent.
#[inline]
pub fn powi_signed(x: f64, k: i32) -> f64 {
    if k >= 0 {
        powi(x, k as u32)
    } else {
        1.0 / powi(x, k.unsigned_abs())
    }
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `0 ln 0 := 0`.
#[inline]
pub fn xlogx_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln(x / y)
    }
}

/// Falling factorial `n (n-1) ... (n-k+1)` as `f64`; zero when `n < k`.
#[inline]
pub fn falling_factorial(n: u64, k: u32) -> f64 {
    if (n as u128) < k as u128 {
        return 0.0;
    }
    let mut acc = 1.0;
    for j in 0..k as u64 {
        acc *= (n - j) as f64;
    }
    acc
}
