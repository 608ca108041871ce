//! Multi-index arithmetic, the factorial family, and the coefficient
//! systems consumed by the recursions: secant numbers `a_n`, the
//! reciprocal-cosine coefficients `β`, the multi-index system `α` and its
//! convolution inverse `γ`, and the shift polynomials `p_k`.

mod multi_index;

use std::collections::BTreeMap;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::One;

pub use multi_index::{
    binomial, factorial, indices_of_size, indices_of_weight, mi_binomial, mi_multinomial, split_pairs, splits,
    MultiIndex,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `n!!` with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<BigInt> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!("double factorial of {n}")));
    }
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    Ok(acc)
}

/// `(2k-1)!!` and friends show up everywhere with a nonnegative argument
/// or exactly -1.
pub(crate) fn dfact(n: i64) -> BigInt {
    double_factorial(n).expect("double factorial argument below -1")
}

pub(crate) fn dfact_s<T: Scalar>(n: i64) -> T {
    T::from_bigint(&dfact(n))
}

pub(crate) fn fact_s<T: Scalar>(n: u32) -> T {
    T::from_bigint(&factorial(n))
}

/// Reciprocal of a power series with nonzero constant term, to `len` terms.
fn invert_series<T: Scalar>(coeffs: &[T], len: usize) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(len);
    let c0 = coeffs[0].clone();
    for n in 0..len {
        if n == 0 {
            out.push(T::one() / c0.clone());
            continue;
        }
        let mut acc = T::zero();
        for k in 1..=n.min(coeffs.len() - 1) {
            acc = acc + coeffs[k].clone() * out[n - k].clone();
        }
        out.push(-acc / c0.clone());
    }
    out
}

/// Secant numbers `a_0..=a_max` from `1/cos x = Σ a_n x^{2n}/(2n)!`.
pub fn secant_numbers<T: Scalar>(max: usize) -> Vec<T> {
    // cos x in the variable u = x^2.
    let cos: Vec<T> = (0..=max)
        .map(|n| {
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            sign / fact_s::<T>(2 * n as u32)
        })
        .collect();
    invert_series(&cos, max + 1).into_iter().enumerate().map(|(n, r)| r * fact_s::<T>(2 * n as u32)).collect()
}

/// `β_0..=β_max` with `1/cos(√2 x) = Σ β_b x^{2b}`, computed as
/// `β_b = 2^b a_b / (2b)!`.
pub fn beta_coefficients<T: Scalar>(max: usize) -> Vec<T> {
    secant_numbers::<T>(max)
        .into_iter()
        .enumerate()
        .map(|(b, a)| a * T::from_i64(2).pow_u32(b as u32) / fact_s::<T>(2 * b as u32))
        .collect()
}

/// The same `β_b` by inverting `cos(√2 x) = Σ (-2)^n x^{2n}/(2n)!` directly.
pub fn beta_by_direct_inversion<T: Scalar>(max: usize) -> Vec<T> {
    let cos: Vec<T> = (0..=max).map(|n| T::from_i64(-2).pow_u32(n as u32) / fact_s::<T>(2 * n as u32)).collect();
    invert_series(&cos, max + 1)
}

/// `γ_L = (-1)^{||L||} / (L! (2|L|-1)!!)`.
pub fn gamma_coefficient<T: Scalar>(l: &MultiIndex) -> T {
    let sign = if l.size().is_multiple_of(2) { T::one() } else { -T::one() };
    sign / (T::from_bigint(&l.factorial()) * dfact_s::<T>(2 * l.weight() as i64 - 1))
}

/// Which multi-indices enter the shift polynomial `p_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShiftMode {
    /// `|L| = k`.
    Weighted,
    /// `||L|| = k`, truncated at the requested weight.
    Counted,
}

impl ShiftMode {
    pub fn name(self) -> &'static str {
        match self {
            ShiftMode::Weighted => "weighted",
            ShiftMode::Counted => "counted",
        }
    }
}

/// Coefficients `(-1)^{||L||-1}/L!` of `s^L` in `p_k(s)`. Counted mode has
/// infinitely many terms, so `max_weight` bounds `|L|` there.
pub fn p_polynomial<T: Scalar>(k: u32, mode: ShiftMode, max_weight: u32) -> BTreeMap<MultiIndex, T> {
    assert!(k >= 1, "p_k is defined for k >= 1");
    let candidates = match mode {
        ShiftMode::Weighted => indices_of_weight(k),
        ShiftMode::Counted => indices_of_size(k, max_weight),
    };
    candidates
        .into_iter()
        .map(|l| {
            let sign = if (l.size() - 1) % 2 == 0 { T::one() } else { -T::one() };
            let c = sign / T::from_bigint(&l.factorial());
            (l, c)
        })
        .collect()
}

/// Memoized `α_L`, with `β_L = α_L / L!`.
///
/// `α_0 = 1` and for `b ≠ 0`
/// `α_b = b! Σ_{L+L'=b, L'≠0} (-1)^{||L'||-1} α_L / (L! L'! (2|L'|-1)!!)`.
#[derive(Debug, Default)]
pub struct Coefficients<T> {
    alpha: DashMap<MultiIndex, T>,
}

impl<T: Scalar> Coefficients<T> {
    pub fn new() -> Self {
        Self { alpha: DashMap::new() }
    }

    pub fn alpha(&self, b: &MultiIndex) -> T {
        if b.is_zero() {
            return T::one();
        }
        if let Some(v) = self.alpha.get(b) {
            return v.clone();
        }
        let mut acc = T::zero();
        for (l, lp) in split_pairs(b) {
            if lp.is_zero() {
                continue;
            }
            let sign = if (lp.size() - 1) % 2 == 0 { T::one() } else { -T::one() };
            let denom = T::from_bigint(&(l.factorial() * lp.factorial() * dfact(2 * lp.weight() as i64 - 1)));
            acc = acc + sign * self.alpha(&l) / denom;
        }
        let value = T::from_bigint(&b.factorial()) * acc;
        self.alpha.entry(b.clone()).or_insert(value).clone()
    }

    /// `β_L = α_L / L!`.
    pub fn beta(&self, l: &MultiIndex) -> T {
        self.alpha(l) / T::from_bigint(&l.factorial())
    }

    pub fn gamma(&self, l: &MultiIndex) -> T {
        gamma_coefficient(l)
    }

    /// `Σ_{L+L'=b} β_L γ_{L'}`, which is `1` at `b = 0` and `0` otherwise.
    pub fn convolution(&self, b: &MultiIndex) -> T {
        split_pairs(b).into_iter().fold(T::zero(), |acc, (l, lp)| acc + self.beta(&l) * self.gamma(&lp))
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(0).unwrap(), BigInt::from(1));
        assert_eq!(double_factorial(5).unwrap(), BigInt::from(15));
        assert_eq!(double_factorial(7).unwrap(), BigInt::from(105));
        assert!(double_factorial(-2).is_err());
    }

    /// Long division of 1 by the truncated cosine series, coefficient by
    /// coefficient in the variable x^2, done by hand here:
    /// 1/cos x = 1 + x^2/2 + 5x^4/24 + 61x^6/720 + ...
    #[test]
    fn secant_numbers_match_long_division() {
        let a: Vec<Rational> = secant_numbers(3);
        assert_eq!(a, vec![q(1, 1), q(1, 1), q(5, 1), q(61, 1)]);
    }

    #[test]
    fn beta_values() {
        let b: Vec<Rational> = beta_coefficients(2);
        assert_eq!(b, vec![q(1, 1), q(1, 1), q(5, 6)]);
    }

    #[test]
    fn beta_routes_agree() {
        let a: Vec<Rational> = beta_coefficients(10);
        let b: Vec<Rational> = beta_by_direct_inversion(10);
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_values() {
        let c = Coefficients::<Rational>::new();
        assert_eq!(c.alpha(&MultiIndex::zero()), q(1, 1));
        assert_eq!(c.alpha(&MultiIndex::first(1)), q(1, 1));
        assert_eq!(c.alpha(&MultiIndex::first(2)), q(5, 3));
    }

    #[test]
    fn alpha_on_deltas_is_not_the_printed_closed_form() {
        // The recursion gives 1/(2l-1)!!, not 1/(2l+1)!!.
        let c = Coefficients::<Rational>::new();
        for l in 1..=4usize {
            let expect = Rational::one() / Rational::from_bigint(&dfact(2 * l as i64 - 1));
            assert_eq!(c.alpha(&MultiIndex::delta(l)), expect);
        }
        assert_ne!(c.alpha(&MultiIndex::delta(1)), q(1, 3));
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_coefficient::<Rational>(&MultiIndex::zero()), q(1, 1));
        assert_eq!(gamma_coefficient::<Rational>(&MultiIndex::first(1)), q(-1, 1));
        assert_eq!(gamma_coefficient::<Rational>(&MultiIndex::delta(2)), q(-1, 3));
    }

    #[test]
    fn alpha_row_is_factorial_times_beta() {
        let c = Coefficients::<Rational>::new();
        let beta: Vec<Rational> = beta_coefficients(10);
        for l in 0..=10u32 {
            let lhs = c.alpha(&MultiIndex::first(l));
            assert_eq!(lhs, fact_s::<Rational>(l) * beta[l as usize].clone(), "l = {l}");
        }
    }

    #[test]
    fn convolution_inverse_up_to_weight_six() {
        let c = Coefficients::<Rational>::new();
        for w in 0..=6 {
            for b in indices_of_weight(w) {
                let expect = if w == 0 { q(1, 1) } else { q(0, 1) };
                assert_eq!(c.convolution(&b), expect, "b = {b:?}");
            }
        }
    }

    #[test]
    fn shift_polynomials() {
        let p1w: BTreeMap<MultiIndex, Rational> = p_polynomial(1, ShiftMode::Weighted, 5);
        let p1c: BTreeMap<MultiIndex, Rational> = p_polynomial(1, ShiftMode::Counted, 1);
        let single: BTreeMap<_, _> = [(MultiIndex::delta(1), q(1, 1))].into_iter().collect();
        assert_eq!(p1w, single);
        assert_eq!(p1c, single);

        let p2w: BTreeMap<MultiIndex, Rational> = p_polynomial(2, ShiftMode::Weighted, 5);
        let expect: BTreeMap<_, _> =
            [(MultiIndex::delta(2), q(1, 1)), (MultiIndex::first(2), q(-1, 2))].into_iter().collect();
        assert_eq!(p2w, expect);

        let p2c: BTreeMap<MultiIndex, Rational> = p_polynomial(2, ShiftMode::Counted, 3);
        assert_eq!(p2c.get(&MultiIndex::first(2)), Some(&q(-1, 2)));
        assert_eq!(p2c.get(&MultiIndex::from_counts(&[1, 1])), Some(&q(-1, 1)));
        assert!(!p2c.contains_key(&MultiIndex::delta(2)));
    }
}
