//! Exact arithmetic in the signed cancellation meadow of rationals.
//!
//! The meadow is the field of rationals with the multiplicative inverse made
//! total by `0⁻¹ = 0`, extended with a signum operation. The order predicates
//! and the probability predicate are defined through signum, exactly as the
//! equational theory does, so that everything stays inside the signature.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational number, always stored reduced with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct RatParseError(pub String);

impl Rat {
    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom`, reduced. A zero denominator yields zero (meadow division).
    pub fn new(numer: i64, denom: i64) -> Rat {
        Rat::from_integer(numer).div(&Rat::from_integer(denom))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Rat {
        if denom.is_zero() {
            return Rat::zero();
        }
        Rat(BigRational::new(numer, denom))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn add(&self, other: &Rat) -> Rat {
        Rat(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Rat) -> Rat {
        Rat(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Rat) -> Rat {
        Rat(&self.0 * &other.0)
    }

    pub fn neg(&self) -> Rat {
        Rat(-&self.0)
    }

    /// Total multiplicative inverse: `inv(0) = 0`.
    pub fn inv(&self) -> Rat {
        if self.0.is_zero() {
            Rat::zero()
        } else {
            Rat(self.0.recip())
        }
    }

    /// `self · other⁻¹`, so division by zero is zero.
    pub fn div(&self, other: &Rat) -> Rat {
        self.mul(&other.inv())
    }

    /// Signum as a meadow element: −1, 0 or 1.
    pub fn sign(&self) -> Rat {
        if self.0.is_positive() {
            Rat::one()
        } else if self.0.is_negative() {
            Rat::from_integer(-1)
        } else {
            Rat::zero()
        }
    }

    /// `x < y ⟺ s(y − x) = 1`.
    pub fn lt(&self, other: &Rat) -> bool {
        other.sub(self).sign().is_one()
    }

    /// `x ≤ y ⟺ s(s(y − x) + 1) = 1`.
    pub fn leq(&self, other: &Rat) -> bool {
        other.sub(self).sign().add(&Rat::one()).sign().is_one()
    }

    /// Membership in the set of probabilities, evaluated as
    /// `s(s(π) + 1) · s(s(1 − π) + 1) = 1`.
    pub fn is_prob(&self) -> bool {
        let one = Rat::one();
        let lower = self.sign().add(&one).sign();
        let upper = one.sub(self).sign().add(&one).sign();
        lower.mul(&upper).is_one()
    }

    /// Complement `1 − π`.
    pub fn complement(&self) -> Rat {
        Rat::one().sub(self)
    }

    /// Conversion for reporting only; never used in decisions.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Rat>>(items: I) -> Rat {
        items.into_iter().fold(Rat::zero(), |acc, x| acc.add(x))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_integer(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Rat {
        Rat(r)
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        Rat::add(self, rhs)
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        Rat::sub(self, rhs)
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        Rat::mul(self, rhs)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat::neg(self)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = RatParseError;

    /// Accepts `p`, `p/q`, `-p` and `-p/q` with decimal digits. A zero
    /// denominator is rejected as a literal even though meadow division is total.
    fn from_str(s: &str) -> Result<Rat, RatParseError> {
        let err = || RatParseError(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let digits = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit());
        let (n, d) = match body.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (body, "1"),
        };
        if !digits(n) || !digits(d) {
            return Err(err());
        }
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        let r = Rat(BigRational::new(n, d));
        Ok(if neg { r.neg() } else { r })
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Textbook comparison used only to cross-check the signum-based predicates.
pub fn fraction_cmp(a: &Rat, b: &Rat) -> Ordering {
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}
