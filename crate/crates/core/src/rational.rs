//! Exact rational numbers and their `"p/q"` text form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for every filtration value and coordinate.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Formats in lowest terms with a positive denominator; integers drop the `/1`.
pub fn format(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, a plain integer, or a finite decimal such as `"-1.25"` or `"3e-2"`.
///
/// Decimals are read exactly, so `"0.1"` is `1/10`.
pub fn parse(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(at) => {
            let e: i32 = s[at + 1..].parse().map_err(|_| bad())?;
            (&s[..at], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Exact rational for a finite `f64` (the binary value, not the shortest decimal).
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

pub fn to_f64(r: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Divides out the gcd of integer coefficients and fixes the sign of the first nonzero one.
pub fn primitive(coeffs: &mut [BigInt]) {
    let g = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if g.is_zero() {
        return;
    }
    let flip = coeffs.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
    for c in coeffs.iter_mut() {
        *c = &*c / &g;
        if flip {
            *c = -&*c;
        }
    }
}

/// Serde adapter storing a [`Rational`] as its `"p/q"` string.
pub mod serde_text {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Reads a rational from a JSON string (`"p/q"` or decimal) or a JSON number.
pub fn from_json(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::String(s) => parse(s),
        serde_json::Value::Number(n) => parse(&n.to_string()),
        other => Err(Error::Parse(format!("expected a rational, found {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse("-4").unwrap(), int(-4));
        assert_eq!(parse("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse("3e-2").unwrap(), ratio(3, 100));
        assert_eq!(parse("2.5E1").unwrap(), int(25));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "abc", "1..2", "-", "1/x"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formats_lowest_terms_positive_denominator() {
        assert_eq!(format(&Rational::new(BigInt::from(4), BigInt::from(-6))), "-2/3");
        assert_eq!(format(&int(7)), "7");
    }

    #[test]
    fn primitive_normalizes_sign_and_gcd() {
        let mut c = vec![BigInt::from(-4), BigInt::from(6), BigInt::from(0)];
        primitive(&mut c);
        assert_eq!(c, vec![BigInt::from(2), BigInt::from(-3), BigInt::from(0)]);
    }

    proptest::proptest! {
        #[test]
        fn format_parse_roundtrip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = ratio(p, q);
            proptest::prop_assert_eq!(parse(&format(&r)).unwrap(), r);
        }
    }
}
