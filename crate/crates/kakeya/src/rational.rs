//! Exact rational scalars plus the `p/q` syntax that crosses every text
//! interface of this crate (CLI arguments, schedule files, reports).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rational = BigRational;

/// `rat(3, -4)` -> -3/4. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// 2^e for signed e.
pub fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as u64)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as u64)
    }
}

/// Binary exponentiation; exponent 0 gives 1 even for base 0.
pub fn pow_rational(base: &Rational, mut exp: u64) -> Rational {
    let mut acc = Rational::one();
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= &sq;
        }
        exp >>= 1;
        if exp > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FractionError {
    #[error("empty fraction")]
    Empty,
    #[error("malformed fraction `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Accepts `p` or `p/q`, base 10, optional leading `-` on p. No whitespace,
/// no `+`, q unsigned. This is the one fraction grammar for all inputs.
pub fn parse_fraction(s: &str) -> Result<Rational, FractionError> {
    if s.is_empty() {
        return Err(FractionError::Empty);
    }
    let bad = || FractionError::Malformed(s.to_string());
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num_digits = num_str.strip_prefix('-').unwrap_or(num_str);
    if num_digits.is_empty() || !num_digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num = BigInt::from_str(num_str).map_err(|_| bad())?;
    let den = match den_str {
        None => BigInt::one(),
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            BigInt::from_str(d).map_err(|_| bad())?
        }
    };
    if den.is_zero() {
        return Err(FractionError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Always `p/q`, reduced, q >= 1. Round-trips through `parse_fraction`.
pub fn format_fraction(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact fixed-point decimal with `dp` digits, ties away from zero.
/// Used wherever a report wants a human-readable magnitude next to the
/// exact fraction; never used in comparisons.
pub fn decimal_fixed(r: &Rational, dp: usize) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = r.abs();
    let scale = BigInt::from(10u32).pow(dp as u32);
    let scaled = abs.numer() * &scale;
    let (q, rem) = num_integer::Integer::div_rem(&scaled, abs.denom());
    let q = if &rem * 2 >= *abs.denom() { q + 1 } else { q };
    let digits = q.to_biguint().unwrap().to_string();
    if dp == 0 {
        return format!("{sign}{digits}");
    }
    let pad = dp.saturating_sub(digits.len());
    let whole: String;
    let frac: String;
    if pad > 0 {
        whole = "0".to_string();
        frac = format!("{}{}", "0".repeat(pad), digits);
    } else {
        let cut = digits.len() - dp;
        whole = if cut == 0 { "0".into() } else { digits[..cut].to_string() };
        frac = digits[cut..].to_string();
    }
    format!("{sign}{whole}.{frac}")
}

/// Floor to i64; panics if out of range (callers guard magnitudes).
pub fn floor_i64(r: &Rational) -> i64 {
    r.floor().to_integer().to_i64().expect("floor out of i64 range")
}

pub fn biguint_to_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_plain_and_slash() {
        assert_eq!(parse_fraction("3").unwrap(), int(3));
        assert_eq!(parse_fraction("-3").unwrap(), int(-3));
        assert_eq!(parse_fraction("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_fraction("-3/4").unwrap(), rat(-3, 4));
        assert_eq!(parse_fraction("6/8").unwrap(), rat(3, 4));
        assert_eq!(parse_fraction("0/7").unwrap(), int(0));
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "/", "1/", "/2", "--1", "1/-2", "+1", "1.5", "a", "1/2/3",
                  " 1", "1 ", "0x10", "1/0x2", "-"] {
            assert!(parse_fraction(s).is_err(), "accepted {s:?}");
        }
        assert_eq!(
            parse_fraction("1/0"),
            Err(FractionError::ZeroDenominator("1/0".into()))
        );
    }

    #[test]
    fn format_round_trips() {
        for r in [rat(0, 1), rat(-7, 3), rat(22, 7), int(5)] {
            assert_eq!(parse_fraction(&format_fraction(&r)).unwrap(), r);
        }
        assert_eq!(format_fraction(&rat(6, 8)), "3/4");
        assert_eq!(format_fraction(&int(5)), "5/1");
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(decimal_fixed(&rat(1, 3), 4), "0.3333");
        assert_eq!(decimal_fixed(&rat(2, 3), 4), "0.6667");
        assert_eq!(decimal_fixed(&rat(-1, 2), 1), "-0.5");
        assert_eq!(decimal_fixed(&rat(1, 2), 0), "1");
        assert_eq!(decimal_fixed(&rat(1, 200), 2), "0.01");
        assert_eq!(decimal_fixed(&int(12), 2), "12.00");
        assert_eq!(decimal_fixed(&rat(999, 1000), 2), "1.00");
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let b = rat(15, 16);
        let mut acc = int(1);
        for e in 0..20u64 {
            assert_eq!(pow_rational(&b, e), acc);
            acc *= &b;
        }
        assert_eq!(pow2(-4), rat(1, 16));
        assert_eq!(pow2(5), int(32));
    }
}
