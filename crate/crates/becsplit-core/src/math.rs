//! Scalar math shims: route to `std` intrinsics when available, `libm`
//! otherwise, so every numeric module works under `no_std`.

#![allow(dead_code)]

macro_rules! shim {
    ($name:ident, $std:ident, $libm:ident, 1) => {
        #[inline(always)]
        pub fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            {
                x.$std()
            }
            #[cfg(not(feature = "std"))]
            {
                libm::$libm(x)
            }
        }
    };
    ($name:ident, $std:ident, $libm:ident, 2) => {
        #[inline(always)]
        pub fn $name(x: f64, y: f64) -> f64 {
            #[cfg(feature = "std")]
            {
                x.$std(y)
            }
            #[cfg(not(feature = "std"))]
            {
                libm::$libm(x, y)
            }
        }
    };
}

shim!(sqrt, sqrt, sqrt, 1);
shim!(sin, sin, sin, 1);
shim!(cos, cos, cos, 1);
shim!(exp, exp, exp, 1);
shim!(ln, ln, log, 1);
shim!(log2, log2, log2, 1);
shim!(round, round, round, 1);
shim!(ceil, ceil, ceil, 1);
shim!(hypot, hypot, hypot, 2);
shim!(powf, powf, pow, 2);

/// x^k by repeated squaring for integer exponents.
#[inline]
pub fn powi(x: f64, k: i32) -> f64 {
    let mut base = if k < 0 { 1.0 / x } else { x };
    let mut n = k.unsigned_abs();
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !(1u64 << 63))
}

#[inline(always)]
pub fn copysign(x: f64, y: f64) -> f64 {
    let sign = y.to_bits() & (1u64 << 63);
    f64::from_bits((x.to_bits() & !(1u64 << 63)) | sign)
}

/// sin(x)/x with the removable singularity handled.
#[inline(always)]
pub fn sinc(x: f64) -> f64 {
    if abs(x) < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        sin(x) / x
    }
}
