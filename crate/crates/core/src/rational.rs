//! Exact rationals and their text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^-n`.
pub fn dyadic(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n as usize)
}

pub fn half(q: &Rational) -> Rational {
    q / int(2)
}

/// Parses `"p/q"` or `"p"`.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Malformed(format!("bad rational `{text}`")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Malformed(format!("bad rational `{text}`")))?;
    if d.is_zero() {
        return Err(Error::Malformed(format!("zero denominator in `{text}`")));
    }
    Ok(Rational::new(n, d))
}

/// Always `"p/q"` with `q >= 1`, in lowest terms.
pub fn format(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).abs()
}

/// Lossy conversion for display and floating-point side computations.
pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("2/5").unwrap(), rat(2, 5));
        assert_eq!(parse("-4/6").unwrap(), rat(-2, 3));
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(format(&int(3)), "3/1");
        assert_eq!(format(&rat(-1, 2)), "-1/2");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn dyadics() {
        assert_eq!(dyadic(0), one());
        assert_eq!(dyadic(3), rat(1, 8));
        assert_eq!(dyadic(40) * int(1 << 20), dyadic(20));
    }
}
