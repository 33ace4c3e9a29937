//! Small exact-arithmetic helpers shared across modules.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

/// `2^(-k)` as an exact rational.
pub fn pow2_neg(k: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << k)
}

/// `2^k` as an exact rational.
pub fn pow2(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

/// Floor of a rational toward negative infinity.
pub fn floor_big(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// Ceiling of a rational toward positive infinity.
pub fn ceil_big(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

/// `log2` of a positive rational as `f64`, robust to values far outside the
/// `f64` exponent range: computed from bit lengths plus 53-bit mantissas.
pub fn log2_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive(), "log2 of a non-positive rational");
    log2_bigint(x.numer()) - log2_bigint(x.denom())
}

fn log2_bigint(x: &BigInt) -> f64 {
    let mag = x.magnitude();
    let bits = mag.bits();
    if bits <= 53 {
        let v: u64 = mag.try_into().expect("fits in u64");
        return (v as f64).log2();
    }
    let shift = bits - 53;
    let top: u64 = (mag >> shift).try_into().expect("53 bits fit");
    (top as f64).log2() + shift as f64
}

/// Render a rational as both an exact fraction and a decimal approximation.
pub fn display_rational(x: &BigRational) -> String {
    if x.is_zero() {
        return "0 (0.0)".to_string();
    }
    let approx = approx_f64(x);
    format!("{}/{} ({:.6e})", x.numer(), x.denom(), approx)
}

/// `f64` approximation that survives huge exponents by going through log2.
pub fn approx_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * log2_rational(&x.abs()).exp2()
}
