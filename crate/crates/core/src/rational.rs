//! Exact rational numbers and their textual forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `12`, `-3`, `1.5`, `-0.25` or `7/2` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if digits.is_empty() {
        return None;
    }
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut numer: BigInt = if whole.is_empty() {
        BigInt::zero()
    } else {
        whole.parse().ok()?
    };
    let mut denom = BigInt::one();
    for c in frac.chars() {
        numer = numer * 10 + BigInt::from(c.to_digit(10)?);
        denom *= 10;
    }
    if negative {
        numer = -numer;
    }
    Some(Rational::new(numer, denom))
}

/// Finite decimal expansion of `value`, if one exists (denominator of the
/// form 2^a 5^b). Integers print without a fractional part.
pub fn to_decimal(value: &Rational) -> Option<String> {
    let mut denom = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while denom.is_even() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    if places == 0 {
        return Some(value.numer().to_string());
    }
    let scaled = value * Rational::from_integer(BigInt::from(10).pow(places as u32));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (whole, frac) = digits.split_at(digits.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    Some(format!("{sign}{whole}.{frac}"))
}

/// `p/q`, or just `p` when the value is integral.
pub fn to_fraction(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn floor(value: &Rational) -> Rational {
    Rational::from_integer(value.floor().to_integer())
}

pub fn ceil(value: &Rational) -> Rational {
    Rational::from_integer(value.ceil().to_integer())
}
