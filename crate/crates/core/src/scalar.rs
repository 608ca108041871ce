//! Scalar types the engine can run over.
//!
//! Every primary computation uses [`Rational`](crate::Rational). The `f64`
//! instantiation exists so the same kernels can be compared against
//! floating-point quadrature.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// A field the recursions can be evaluated in.
pub trait Scalar: Num + Neg<Output = Self> + Clone + Debug + Send + Sync + 'static {
    fn from_bigint(n: &BigInt) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    fn ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer) / Self::from_i64(denom)
    }

    /// Equality up to the precision of the type: exact for rationals.
    fn agrees(&self, other: &Self) -> bool;

    fn to_f64(&self) -> f64;

    /// Human-readable text, `p/q` for rationals.
    fn render(&self) -> String;

    fn pow_u32(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for BigRational {
    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn agrees(&self, other: &Self) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        // Large numerators and denominators overflow a naive division.
        let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(900);
        let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    }

    fn render(&self) -> String {
        render_rational(self)
    }
}

impl Scalar for f64 {
    fn from_bigint(n: &BigInt) -> Self {
        n.to_f64().unwrap_or(f64::NAN)
    }

    fn agrees(&self, other: &Self) -> bool {
        let scale = self.abs().max(other.abs()).max(f64::MIN_POSITIVE);
        (self - other).abs() <= 1e-9 * scale
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

/// Renders a rational as `p/q` in lowest terms; integers drop the `/1`.
pub fn render_rational(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Renders a rational with an explicit denominator, as used in JSON.
pub fn render_rational_explicit(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `p/q` or `p` into a reduced rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if denom.is_zero() {
        return None;
    }
    Some(BigRational::new(numer, denom))
}

/// True when the rational is strictly negative.
pub fn is_negative(value: &BigRational) -> bool {
    value.is_negative()
}
