//! Exact rational scalars.
//!
//! Every coefficient in the toolkit is a [`Scalar`], an arbitrary-precision
//! rational kept in lowest terms with a positive denominator. Equality is
//! structural, so every predicate downstream is a decision procedure.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Scalar = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseScalarError {
    #[error("empty rational string")]
    Empty,
    #[error("malformed rational `{0}` (expected \"p\" or \"p/q\")")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Scalar {
    assert!(den != 0, "zero denominator");
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

fn parse_integer(s: &str, whole: &str) -> Result<BigInt, ParseScalarError> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseScalarError::Malformed(whole.to_string()));
    }
    s.trim_start_matches('+')
        .parse::<BigInt>()
        .map_err(|_| ParseScalarError::Malformed(whole.to_string()))
}

/// Parses `"p"` or `"p/q"` exactly. Decimal and exponent notation are rejected.
pub fn parse(s: &str) -> Result<Scalar, ParseScalarError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(ParseScalarError::Empty);
    }
    match t.split_once('/') {
        None => Ok(BigRational::from_integer(parse_integer(t, s)?)),
        Some((p, q)) => {
            if q.starts_with(['-', '+']) {
                return Err(ParseScalarError::Malformed(s.to_string()));
            }
            let num = parse_integer(p.trim(), s)?;
            let den = parse_integer(q.trim(), s)?;
            if den.is_zero() {
                return Err(ParseScalarError::ZeroDenominator(s.to_string()));
            }
            Ok(BigRational::new(num, den))
        }
    }
}

/// Canonical string form: `"p"` for integers, `"p/q"` otherwise.
pub fn format(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn is_canonical(x: &Scalar) -> bool {
    use num_integer::Integer;
    x.denom().is_positive() && x.numer().gcd(x.denom()).is_one()
}
