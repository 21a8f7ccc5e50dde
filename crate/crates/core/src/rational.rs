//! Exact rational arithmetic helpers.
//!
//! Prices and probabilities are kept as [`Rat`] everywhere inside the crate
//! so that dynamic-program comparisons and LP breakpoints are exact. Floats
//! appear only at the output boundary and in Monte-Carlo sampling.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// `n / d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as an exact rational.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float (every finite f64 is rational).
pub fn from_f64_exact(x: f64) -> Result<Rat> {
    Rat::from_float(x).ok_or_else(|| Error::InvalidParameter(format!("non-finite value {x}")))
}

/// True when `x` is an integer multiple of `unit` (`unit > 0`).
pub fn is_multiple_of(x: &Rat, unit: &Rat) -> bool {
    (x / unit).is_integer()
}

/// Largest multiple of `unit` that is `<= x`.
pub fn floor_to_multiple(x: &Rat, unit: &Rat) -> Rat {
    (x / unit).floor() * unit
}

/// Smallest multiple of `unit` that is `>= x`.
pub fn ceil_to_multiple(x: &Rat, unit: &Rat) -> Rat {
    (x / unit).ceil() * unit
}

/// Parses `"7"`, `"-1.25"` or `"3/40"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("bad rational literal {s:?}")));
    }
    let digits = format!(
        "{}{}",
        if int_part.is_empty() { "0" } else { int_part },
        frac_part
    );
    let n: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational literal {s:?}")))?;
    let d = BigInt::from(10u8).pow(frac_part.len() as u32);
    Ok(Rat::new(BigInt::from(sign) * n, d))
}

/// Canonical string form: integer, terminating decimal, or `a/b`.
///
/// The output round-trips exactly through [`parse_rat`].
pub fn format_rat(x: &Rat) -> String {
    if x.is_integer() {
        return x.numer().to_string();
    }
    let denom = x.denom();
    let mut rest = denom.clone();
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{}/{}", x.numer(), x.denom());
    }
    let digits = twos.max(fives);
    let scaled = x.numer() * BigInt::from(10u8).pow(digits) / denom;
    let neg = scaled.is_negative();
    let body = scaled.abs().to_string();
    let body = if body.len() <= digits as usize {
        format!("{}{}", "0".repeat(digits as usize + 1 - body.len()), body)
    } else {
        body
    };
    let split = body.len() - digits as usize;
    let mut out = format!("{}.{}", &body[..split], &body[split..]);
    while out.ends_with('0') {
        out.pop();
    }
    if neg {
        format!("-{out}")
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["7", "-3", "0.025", "9.84", "3/40", "-1/3", "1.23"] {
            let r = parse_rat(s).unwrap();
            let back = parse_rat(&format_rat(&r)).unwrap();
            assert_eq!(r, back, "round trip failed for {s}");
        }
    }

    #[test]
    fn format_prefers_decimal_when_terminating() {
        assert_eq!(format_rat(&rat(1, 40)), "0.025");
        assert_eq!(format_rat(&rat(123, 10)), "12.3");
        assert_eq!(format_rat(&rat(5, 1)), "5");
        assert_eq!(format_rat(&rat(1, 3)), "1/3");
        assert_eq!(format_rat(&rat(-1, 8)), "-0.125");
    }

    #[test]
    fn grid_rounding() {
        let g = rat(1, 40);
        assert_eq!(ceil_to_multiple(&rat(123, 1000), &g), rat(5, 40));
        assert_eq!(floor_to_multiple(&rat(123, 1000), &g), rat(4, 40));
        assert!(is_multiple_of(&rat(10, 40), &g));
        assert!(!is_multiple_of(&rat(1, 3), &g));
    }
}
