//! Exact arithmetic helpers shared by every stage.
//!
//! All model data, encodings and penalty coefficients are exact rationals.
//! Floating point only appears inside the simulated-annealing hot loop.

use malachite_base::num::arithmetic::traits::{Ceiling, Floor, Lcm, Pow};
use malachite_base::num::basic::traits::{One, Zero};
use malachite_base::num::conversion::traits::RoundingFrom;
use malachite_base::num::logic::traits::SignificantBits;
use malachite_base::rounding_modes::RoundingMode;

pub use malachite_nz::integer::Integer;
pub use malachite_nz::natural::Natural;
pub use malachite_q::Rational;

/// A parsed numeric token: either finite or one of the two infinities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Number {
    Finite(Rational),
    PosInf,
    NegInf,
}

/// Parses a decimal (`-12.5`, `3e4`, `1.25E-2`), a fraction (`7/3`) or an
/// infinity token (`inf`, `+inf`, `-inf`, `infinity`).
pub fn parse_number(text: &str) -> Option<Number> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    let lower = s.to_ascii_lowercase();
    match lower.as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => return Some(Number::PosInf),
        "-inf" | "-infinity" => return Some(Number::NegInf),
        _ => {}
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num)?;
        let den = parse_decimal(den)?;
        if den == Rational::ZERO {
            return None;
        }
        return Some(Number::Finite(num / den));
    }
    parse_decimal(s).map(Number::Finite)
}

/// Parses a finite decimal literal exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = body[pos + 1..].parse().ok()?;
            (&body[..pos], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let mut value = Rational::from(digits.parse::<Natural>().ok()?);
    let shift = exponent - frac_part.len() as i64;
    let ten = Rational::from(10u32);
    if shift >= 0 {
        value *= (&ten).pow(shift as u64);
    } else {
        value /= (&ten).pow((-shift) as u64);
    }
    Some(if negative { -value } else { value })
}

pub fn rat(n: i64) -> Rational {
    Rational::from(n)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::from_signeds(n, d)
}

pub fn to_f64(value: &Rational) -> f64 {
    f64::rounding_from(value, RoundingMode::Nearest).0
}

pub fn is_integer(value: &Rational) -> bool {
    *value.denominator_ref() == Natural::ONE
}

pub fn floor(value: &Rational) -> Integer {
    value.floor()
}

pub fn ceil(value: &Rational) -> Integer {
    value.ceiling()
}

/// Least common multiple of the denominators of `values` (1 for none).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Natural {
    values
        .into_iter()
        .fold(Natural::ONE, |acc, v| acc.lcm(v.denominator_ref()))
}

/// Number of bits needed to write `n` in binary; equals ⌈log₂(n+1)⌉.
pub fn bit_length(n: &Natural) -> usize {
    n.significant_bits() as usize
}

pub fn pow2(k: usize) -> Natural {
    Natural::ONE << (k as u64)
}

/// Converts an integral rational to `Integer`; panics if it is not integral.
pub fn to_integer(value: &Rational) -> Integer {
    assert!(is_integer(value), "expected an integral rational, got {value}");
    value.floor()
}

pub fn abs(value: &Rational) -> Rational {
    if *value < Rational::ZERO {
        -value.clone()
    } else {
        value.clone()
    }
}
