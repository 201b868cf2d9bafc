//! Exact rational scalars: thin helpers over `num_rational::BigRational`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Arbitrary-precision rational, the coefficient field for all exact data.
pub type Rat = BigRational;

/// Integer as a `Rat`.
pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Ratio of two integers as a `Rat`. Panics if `d == 0`.
pub fn ratq(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Nearest `f64` (NaN only if the value overflows the double range).
pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Real rational embedded in the complex plane.
pub fn to_c64(r: &Rat) -> Complex64 {
    Complex64::new(to_f64(r), 0.0)
}

/// Integer power with field inversion for negative exponents.
/// Panics if `r == 0` and `n < 0`.
pub fn rat_pow(r: &Rat, n: i64) -> Rat {
    let mag = n.unsigned_abs() as u32;
    let powed = Rat::new(r.numer().pow(mag), r.denom().pow(mag));
    if n < 0 {
        powed.recip()
    } else {
        powed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_reduce() {
        assert_eq!(ratq(4, 6), ratq(2, 3));
        assert_eq!(ratq(-4, -6), ratq(2, 3));
        assert_eq!(rat(0), ratq(0, 5));
    }

    #[test]
    fn float_conversion() {
        assert_eq!(to_f64(&ratq(1, 4)), 0.25);
        assert_eq!(to_c64(&rat(-3)), Complex64::new(-3.0, 0.0));
    }
}
