//! Exact scalars and their canonical string form.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::LinalgError;

/// Exact rational scalar used by every matrix in the crate.
pub type Scalar = BigRational;

/// Coefficient ring of a computation.
///
/// All spectral-sequence work is done over the rationals. The integer ring is
/// only used to extract torsion through Smith normal form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    #[default]
    Rational,
    Integer,
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Rational => f.write_str("rational"),
            Ring::Integer => f.write_str("integer"),
        }
    }
}

impl FromStr for Ring {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(Ring::Rational),
            "integer" => Ok(Ring::Integer),
            other => Err(LinalgError::Parse(format!("unknown ring `{other}`"))),
        }
    }
}

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// `(-1)^k` as a scalar.
pub fn sign(k: usize) -> Scalar {
    if k.is_multiple_of(2) {
        one()
    } else {
        -one()
    }
}

/// Canonical text form: `"p"` for integral values, `"p/q"` otherwise, with
/// `q > 0` and `gcd(p, q) = 1`.
pub fn format_scalar(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"p"` or `"p/q"`.
///
/// In strict mode the text must already be canonical (`"2/4"`, `"3/1"`,
/// `"1/-2"`, `"+1"` are rejected); otherwise the value is normalized.
pub fn parse_scalar(text: &str, strict: bool) -> Result<Scalar, LinalgError> {
    let bad = || LinalgError::Parse(format!("invalid rational `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (text, None),
    };
    let numer = BigInt::from_str(num).map_err(|_| bad())?;
    let denom = match den {
        Some(d) => BigInt::from_str(d).map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(LinalgError::Parse(format!("zero denominator in `{text}`")));
    }
    let value = BigRational::new(numer, denom);
    if strict && format_scalar(&value) != text {
        return Err(LinalgError::NonCanonical(text.to_string()));
    }
    Ok(value)
}

pub fn is_integral(x: &Scalar) -> bool {
    x.is_integer()
}

pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_strings() {
        assert_eq!(format_scalar(&int(3)), "3");
        assert_eq!(format_scalar(&BigRational::new(2.into(), (-4).into())), "-1/2");
        assert_eq!(parse_scalar("-1/2", true).unwrap(), BigRational::new((-1).into(), 2.into()));
    }

    #[test]
    fn strict_rejects_non_canonical() {
        assert!(matches!(parse_scalar("2/4", true), Err(LinalgError::NonCanonical(_))));
        assert!(matches!(parse_scalar("3/1", true), Err(LinalgError::NonCanonical(_))));
        assert_eq!(parse_scalar("2/4", false).unwrap(), BigRational::new(1.into(), 2.into()));
        assert!(parse_scalar("1/0", false).is_err());
        assert!(parse_scalar("x", false).is_err());
    }
}
