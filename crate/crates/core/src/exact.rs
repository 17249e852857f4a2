//! Exact rational arithmetic helpers.
//!
//! All ratings, ranks and weights are carried as [`Rational`] so that values
//! such as `1/3` survive every intermediate step. Rounding only happens when a
//! value is rendered for display.
//!
//! On the wire a rational is written as a plain JSON number when it has a
//! terminating decimal expansion of at most 15 significant digits, and as a
//! `"p/q"` string otherwise. Both forms (and decimal strings) are accepted on
//! input, so serialization round-trips exactly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serialize, Serializer};

pub type Rational = num_rational::BigRational;

const MAX_NUMBER_DIGITS: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational number")]
pub struct ParseRationalError {
    pub input: String,
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"3"`, `"-1.25"`, `"+2"`, `"85/12"` or `"1e-3"`.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().trim_start_matches('+').parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].trim_start_matches('+').parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if (whole.is_empty() && frac.is_empty())
        || !whole.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let joined = format!("{whole}{frac}");
    let mut numer: BigInt = if joined.is_empty() { BigInt::zero() } else { joined.parse().map_err(|_| err())? };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Exact rational for the shortest decimal that round-trips `value`.
pub fn from_f64(value: f64) -> Option<Rational> {
    if !value.is_finite() {
        return None;
    }
    parse_rational(&format!("{value}")).ok()
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Terminating decimal expansion of `value`, if its denominator only has the
/// prime factors 2 and 5.
pub fn terminating_decimal(value: &Rational) -> Option<String> {
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    Some(render_scaled(scaled.numer(), places))
}

fn render_scaled(scaled: &BigInt, places: usize) -> String {
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let body = if places == 0 {
        digits
    } else if digits.len() > places {
        let (w, f) = digits.split_at(digits.len() - places);
        format!("{w}.{f}")
    } else {
        format!("0.{}{}", "0".repeat(places - digits.len()), digits)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Rounds half away from zero to `places` decimals.
pub fn round_half_away(value: &Rational, places: usize) -> Rational {
    let factor = Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let scaled = value * &factor;
    let half = ratio(1, 2);
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    };
    rounded / factor
}

/// Fixed-point rendering with `places` decimals, e.g. `7.08` or `-0.67`.
pub fn fmt_fixed(value: &Rational, places: usize) -> String {
    let rounded = round_half_away(value, places);
    let scaled = rounded * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let out = render_scaled(scaled.numer(), places);
    if out.starts_with('-') && out[1..].bytes().all(|b| b == b'0' || b == b'.') {
        out[1..].to_string()
    } else {
        out
    }
}

/// Like [`fmt_fixed`] with an explicit `+` on positive values.
pub fn fmt_signed(value: &Rational, places: usize) -> String {
    let out = fmt_fixed(value, places);
    if value.is_positive() && !out.bytes().all(|b| b == b'0' || b == b'.') {
        format!("+{out}")
    } else {
        out
    }
}

/// `"85/12"` style rendering (integers without a denominator).
pub fn fmt_exact(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_json_value(value: &Rational) -> serde_json::Value {
    if let Some(dec) = terminating_decimal(value) {
        let sig = dec.trim_start_matches('-').replace('.', "");
        let sig = sig.trim_start_matches('0');
        if sig.len() <= MAX_NUMBER_DIGITS {
            if value.is_integer() {
                if let Some(i) = value.numer().to_i64() {
                    return serde_json::Value::from(i);
                }
            } else if let Some(n) = dec.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                return serde_json::Value::Number(n);
            }
        }
    }
    serde_json::Value::String(fmt_exact(value))
}

pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
    to_json_value(value).serialize(serializer)
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
    deserializer.deserialize_any(RationalVisitor)
}

pub(crate) struct RationalVisitor;

impl Visitor<'_> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a \"p/q\" string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational::from_integer(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        from_f64(v).ok_or_else(|| E::custom(format!("non-finite number {v}")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        parse_rational(v).map_err(E::custom)
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Option<Rational>, serializer: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => to_json_value(v).serialize(serializer),
            None => serializer.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Rational>, D::Error> {
        let raw: Option<serde_json::Value> = serde::Deserialize::deserialize(deserializer)?;
        match raw {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(v) => super::from_json_value(&v).map(Some).map_err(de::Error::custom),
        }
    }
}

/// Serde adapter for maps with rational values.
pub mod map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Serialize};

    use super::*;

    pub fn serialize<K, S>(value: &BTreeMap<K, Rational>, serializer: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        S: Serializer,
    {
        let mut map = serializer.serialize_map(Some(value.len()))?;
        for (k, v) in value {
            map.serialize_entry(k, &to_json_value(v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, K, D>(deserializer: D) -> Result<BTreeMap<K, Rational>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        D: Deserializer<'de>,
    {
        let raw: BTreeMap<K, serde_json::Value> = BTreeMap::deserialize(deserializer)?;
        raw.into_iter()
            .map(|(k, v)| super::from_json_value(&v).map(|r| (k, r)).map_err(de::Error::custom))
            .collect()
    }
}

pub fn from_json_value(value: &serde_json::Value) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: value.to_string(),
    };
    match value {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(BigInt::from(u)))
            } else {
                n.as_f64().and_then(from_f64).ok_or_else(err)
            }
        }
        serde_json::Value::String(s) => parse_rational(s),
        _ => Err(err()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("85/12").unwrap(), ratio(85, 12));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("+2").unwrap(), int(2));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("2.5E1").unwrap(), int(25));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("-").is_err());
    }

    #[test]
    fn f64_conversion_uses_shortest_decimal() {
        assert_eq!(from_f64(0.1).unwrap(), ratio(1, 10));
        assert_eq!(from_f64(7.0833).unwrap(), ratio(70833, 10000));
        assert!(from_f64(f64::NAN).is_none());
    }

    #[test]
    fn display_rounding_half_away_from_zero() {
        assert_eq!(fmt_fixed(&ratio(85, 12), 2), "7.08");
        assert_eq!(fmt_fixed(&ratio(1, 3), 2), "0.33");
        assert_eq!(fmt_fixed(&ratio(5, 3), 2), "1.67");
        assert_eq!(fmt_fixed(&ratio(-2, 3), 2), "-0.67");
        assert_eq!(fmt_fixed(&ratio(1, 200), 2), "0.01");
        assert_eq!(fmt_fixed(&ratio(-1, 200), 2), "-0.01");
        assert_eq!(fmt_fixed(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(fmt_signed(&ratio(1, 3), 2), "+0.33");
        assert_eq!(fmt_signed(&int(0), 2), "0.00");
        assert_eq!(fmt_fixed(&int(-29), 2), "-29.00");
    }

    #[test]
    fn json_codec_is_exact() {
        assert_eq!(to_json_value(&ratio(3, 2)), serde_json::json!(1.5));
        assert_eq!(to_json_value(&int(15)), serde_json::json!(15));
        assert_eq!(to_json_value(&ratio(27, 28)), serde_json::json!("27/28"));
        for r in [ratio(3, 2), ratio(27, 28), ratio(-1, 3), int(-7), ratio(1, 1024), ratio(1, 3 * 1024)] {
            assert_eq!(from_json_value(&to_json_value(&r)).unwrap(), r);
        }
    }

    #[test]
    fn huge_integers_fall_back_to_strings() {
        let big = parse_rational("123456789012345678901234567890").unwrap();
        assert!(to_json_value(&big).is_string());
        assert_eq!(from_json_value(&to_json_value(&big)).unwrap(), big);
    }
}
