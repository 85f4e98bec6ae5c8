//! Exact rational scalars used by the geometric layer.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Exact rational coordinate.
pub type Q = Ratio<i128>;

pub fn q(num: i128, den: i128) -> Q {
    Ratio::new(num, den)
}

pub fn qi(v: i128) -> Q {
    Ratio::from_integer(v)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"-0.375"`, `"1/3"` or `"2.5e-1"` exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse '{s}' as an exact rational"));
    if let Some((a, b)) = s.split_once('/') {
        let num: i128 = a.trim().parse().map_err(|_| bad())?;
        let den: i128 = b.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(q(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let num: i128 = if all.is_empty() { 0 } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac_part.len() as i32;
    let pow = |e: u32| 10i128.checked_pow(e).ok_or_else(bad);
    let mut value = if scale >= 0 {
        qi(num.checked_mul(pow(scale as u32)?).ok_or_else(bad)?)
    } else {
        q(num, pow((-scale) as u32)?)
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Compares `p` with `c * sqrt(s)` exactly (`s >= 0`).
pub fn cmp_with_scaled_sqrt(p: &Q, c: &Q, s: i128) -> Ordering {
    let rhs_sign = if s == 0 || c.is_zero() {
        0
    } else if c.is_positive() {
        1
    } else {
        -1
    };
    let lhs_sign = if p.is_zero() {
        0
    } else if p.is_positive() {
        1
    } else {
        -1
    };
    if lhs_sign != rhs_sign {
        return lhs_sign.cmp(&rhs_sign);
    }
    if lhs_sign == 0 {
        return Ordering::Equal;
    }
    let lhs_sq = p * p;
    let rhs_sq = c * c * qi(s);
    if lhs_sign > 0 {
        lhs_sq.cmp(&rhs_sq)
    } else {
        rhs_sq.cmp(&lhs_sq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_q("0.375").unwrap(), q(3, 8));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert_eq!(parse_q("2").unwrap(), qi(2));
        assert_eq!(parse_q("1/3").unwrap(), q(1, 3));
        assert_eq!(parse_q("2.5e-1").unwrap(), q(1, 4));
        assert_eq!(parse_q(".2").unwrap(), q(1, 5));
        assert!(parse_q("abc").is_err());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn surd_comparison() {
        // 1.4 < sqrt(2) < 1.5
        assert_eq!(cmp_with_scaled_sqrt(&q(7, 5), &qi(1), 2), Ordering::Less);
        assert_eq!(cmp_with_scaled_sqrt(&q(3, 2), &qi(1), 2), Ordering::Greater);
        assert_eq!(cmp_with_scaled_sqrt(&q(-3, 2), &qi(-1), 2), Ordering::Less);
        assert_eq!(cmp_with_scaled_sqrt(&qi(2), &qi(1), 4), Ordering::Equal);
        assert_eq!(cmp_with_scaled_sqrt(&qi(-1), &qi(0), 2), Ordering::Less);
    }
}
