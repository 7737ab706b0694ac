//! Exact rational scalar type and conversion helpers.
//!
//! The model layer works in arbitrary-precision rationals so that
//! evaluation, feasibility checks, and the exact oracle never suffer
//! rounding drift. Floating point is confined to the LP engine.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational scalar used throughout the model layer.
pub type Rat = BigRational;

/// `n` as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// The exact rational value of a finite float (every finite `f64` is a
/// dyadic rational). Returns `None` for NaN and infinities.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_f64(x)
}

/// Nearest-float approximation of a rational.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parse a decimal literal (`"3"`, `"-2.5"`, `"0.31"`) into the exact
/// rational it denotes, i.e. `0.31` becomes `31/100` rather than the
/// nearest double.
pub fn rat_from_decimal(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().ok()?
    };
    let mut denom = BigInt::one();
    for c in frac_part.chars() {
        numer = numer * 10 + (c as u8 - b'0');
        denom *= 10;
    }
    Some(Rat::new(BigInt::from(sign) * numer, denom))
}

/// Render a rational as `"n"` or `"n/d"`.
pub fn rat_display(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Least common multiple of two positive big integers.
pub(crate) fn lcm_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer::Integer;
    a.lcm(b)
}

/// `base^exp` over rationals with a small nonnegative exponent.
pub fn rat_pow(base: &Rat, exp: usize) -> Rat {
    let mut out = Rat::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Floor of a rational as a big integer.
pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// True when `r` is an integer.
pub fn rat_is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// |r| as a rational.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}
