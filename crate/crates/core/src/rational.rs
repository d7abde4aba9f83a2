//! Small helpers around exact rationals: construction, parsing and
//! half-away-from-zero decimal rendering.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

pub fn zero() -> BigRational {
    BigRational::zero()
}

pub fn one() -> BigRational {
    BigRational::one()
}

/// Parses `"2/3"`, `"5"` or a finite decimal such as `"0.41"`.
pub fn parse_ratio(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::invalid(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = text.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Rounds to `places` decimal places, ties away from zero.
pub fn round_half_away(value: &BigRational, places: u32) -> BigRational {
    let scale = BigRational::from_integer(num::pow(BigInt::from(10), places as usize));
    let scaled = value * &scale;
    let half = ratio(1, 2);
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    };
    rounded / scale
}

/// Renders with exactly `places` decimals after half-away-from-zero rounding.
pub fn to_decimal(value: &BigRational, places: u32) -> String {
    let rounded = round_half_away(value, places);
    let scale = num::pow(BigInt::from(10), places as usize);
    let units = (rounded * BigRational::from_integer(scale.clone())).to_integer();
    let negative = units.is_negative();
    let units = units.abs();
    let whole = &units / &scale;
    let frac = &units % &scale;
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!(
            "{sign}{whole}.{frac:0>width$}",
            frac = frac.to_string(),
            width = places as usize
        )
    }
}

/// `p` as a percentage with two decimals, e.g. `0.4475` becomes `"44.75"`.
pub fn to_percent(value: &BigRational) -> String {
    to_decimal(&(value * int(100)), 2)
}

pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `"a/b"` in lowest terms, or just `"a"` for integers.
pub fn to_fraction(value: &BigRational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_half_away_from_zero() {
        assert_eq!(to_decimal(&ratio(1, 8), 2), "0.13");
        assert_eq!(to_decimal(&ratio(-1, 8), 2), "-0.13");
        assert_eq!(to_decimal(&ratio(99120, 2187), 2), "45.32");
        assert_eq!(to_decimal(&ratio(7, 8), 2), "0.88");
        assert_eq!(to_decimal(&int(50), 2), "50.00");
        assert_eq!(to_decimal(&ratio(1, 3), 0), "0");
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_ratio("2/3").unwrap(), ratio(2, 3));
        assert_eq!(parse_ratio("0.41").unwrap(), ratio(41, 100));
        assert_eq!(parse_ratio("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_ratio("7").unwrap(), int(7));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn percent_rendering() {
        assert_eq!(to_percent(&ratio(145, 324)), "44.75");
        assert_eq!(to_fraction(&ratio(361, 729)), "361/729");
        assert_eq!(to_fraction(&int(1)), "1");
    }
}
