use std::collections::BTreeMap;

use crate::combinatorics::{factorial, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bounds of the finite monomial universe `ħ^a Π t_i^{e_i} s^m`: `a < max_genus`,
/// `Σ e_i ≤ max_points`, `i ≤ max_t_index`, `|m| ≤ max_s_weight`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeriesCutoff {
    pub max_genus: u32,
    pub max_points: u32,
    pub max_t_index: u32,
    pub max_s_weight: u32,
}

impl SeriesCutoff {
    pub fn new(max_genus: u32, max_points: u32, max_t_index: u32, max_s_weight: u32) -> Self {
        Self { max_genus, max_points, max_t_index, max_s_weight }
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        m.hbar < self.max_genus
            && m.t_degree() <= self.max_points
            && m.t.len() as u32 <= self.max_t_index + 1
            && m.s.weight() <= self.max_s_weight
    }

    /// Every bound raised by `by`.
    pub fn enlarged(&self, by: u32) -> Self {
        Self::new(self.max_genus + by, self.max_points + by, self.max_t_index + by, self.max_s_weight + by)
    }
}

/// `ħ^{hbar} Π t_i^{t[i]} s^{s}`; `t` carries no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub hbar: u32,
    pub t: Vec<u32>,
    pub s: MultiIndex,
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

impl Monomial {
    pub fn new(hbar: u32, t: Vec<u32>, s: MultiIndex) -> Self {
        Self { hbar, t: trim(t), s }
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn t_var(i: u32) -> Self {
        let mut t = vec![0; i as usize + 1];
        t[i as usize] = 1;
        Self::new(0, t, MultiIndex::zero())
    }

    pub fn t_degree(&self) -> u32 {
        self.t.iter().sum()
    }

    pub fn t_exp(&self, i: u32) -> u32 {
        self.t.get(i as usize).copied().unwrap_or(0)
    }

    pub fn max_t_index(&self) -> Option<u32> {
        if self.t.is_empty() {
            None
        } else {
            Some(self.t.len() as u32 - 1)
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.t.len().max(other.t.len());
        let t = (0..len as u32).map(|i| self.t_exp(i) + other.t_exp(i)).collect();
        Self { hbar: self.hbar + other.hbar, t, s: self.s.add(&other.s) }
    }

    pub fn mul_t(&self, exps: &[u32]) -> Self {
        let len = self.t.len().max(exps.len());
        let t = (0..len).map(|i| self.t_exp(i as u32) + exps.get(i).copied().unwrap_or(0)).collect();
        Self { hbar: self.hbar, t, s: self.s.clone() }
    }

    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.hbar > self.hbar || other.t.len() > self.t.len() {
            return None;
        }
        let mut t = self.t.clone();
        for (i, &e) in other.t.iter().enumerate() {
            t[i] = t[i].checked_sub(e)?;
        }
        Some(Self::new(self.hbar - other.hbar, t, self.s.checked_sub(&other.s)?))
    }

    /// `e! · m!` for exponents `e` of `t` and `m` of `s`.
    pub fn symmetry_factor(&self) -> num_bigint::BigInt {
        self.t.iter().fold(self.s.factorial(), |acc, &e| acc * factorial(e))
    }

    /// `hbar^a t[i1,i2,...] s[(j,c),...]` with repeated t indices listed.
    pub fn render(&self) -> String {
        let ts: Vec<String> =
            self.t.iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i.to_string(), e as usize)).collect();
        let ss: Vec<String> = self.s.pairs().map(|(j, c)| format!("({j},{c})")).collect();
        format!("hbar^{} t[{}] s[{}]", self.hbar, ts.join(","), ss.join(","))
    }
}

/// A finite sum of monomials inside a [`SeriesCutoff`]. Products, powers
/// and derivatives are computed in the quotient ring that the cutoff
/// defines, so every stored coefficient is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T> {
    cutoff: SeriesCutoff,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn zero(cutoff: SeriesCutoff) -> Self {
        Self { cutoff, terms: BTreeMap::new() }
    }

    pub fn one(cutoff: SeriesCutoff) -> Self {
        let mut s = Self::zero(cutoff);
        s.add_term(Monomial::one(), T::one());
        s
    }

    pub fn cutoff(&self) -> SeriesCutoff {
        self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · m`; monomials outside the cutoff are dropped.
    pub fn add_term(&mut self, m: Monomial, coeff: T) {
        if coeff.is_zero() || !self.cutoff.contains(&m) {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + coeff;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, coeff);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = Self::zero(self.cutoff);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * factor.clone());
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, coeff: &T) -> Self {
        let mut out = Self::zero(self.cutoff);
        for (n, c) in &self.terms {
            out.add_term(n.mul(m), c.clone() * coeff.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.cutoff);
        for (m, a) in &self.terms {
            for (n, b) in &other.terms {
                out.add_term(m.mul(n), a.clone() * b.clone());
            }
        }
        out
    }

    /// The same terms viewed in `cutoff`, dropping those outside it.
    pub fn truncate(&self, cutoff: SeriesCutoff) -> Self {
        let mut out = Self::zero(cutoff);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// `∂/∂t_i`.
    pub fn derivative(&self, i: u32) -> Self {
        let mut out = Self::zero(self.cutoff);
        for (m, c) in &self.terms {
            let e = m.t_exp(i);
            if e == 0 {
                continue;
            }
            let mut t = m.t.clone();
            t[i as usize] -= 1;
            out.add_term(Monomial::new(m.hbar, t, m.s.clone()), c.clone() * T::from_i64(e as i64));
        }
        out
    }

    /// `exp(self)`; the constant term must vanish.
    pub fn exponentiate(&self) -> Result<Self> {
        if !self.coefficient(&Monomial::one()).is_zero() {
            return Err(Error::InvalidArgument("exponentiate needs a series without constant term".into()));
        }
        let mut out = Self::one(self.cutoff);
        let mut power = Self::one(self.cutoff);
        let mut k = 1i64;
        loop {
            power = power.mul(self).scale(&T::ratio(1, k));
            if power.is_zero() {
                return Ok(out);
            }
            out = out.add(&power);
            k += 1;
        }
    }

    /// `log(self)`; the constant term must be 1.
    pub fn log(&self) -> Result<Self> {
        let c = self.coefficient(&Monomial::one());
        if !c.agrees(&T::one()) {
            return Err(Error::InvalidArgument("log needs constant term 1".into()));
        }
        let mut x = self.clone();
        x.terms.remove(&Monomial::one());
        let mut out = Self::zero(self.cutoff);
        let mut power = Self::one(self.cutoff);
        let mut k = 1i64;
        loop {
            power = power.mul(&x);
            if power.is_zero() {
                return Ok(out);
            }
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            out = out.add(&power.scale(&(sign / T::from_i64(k))));
            k += 1;
        }
    }
}

impl TruncatedSeries<crate::Rational> {
    /// One `monomial = p/q` line per term, sorted as strings.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{} = {}", m.render(), crate::scalar::render_rational_explicit(c)))
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn cut() -> SeriesCutoff {
        SeriesCutoff::new(3, 4, 3, 2)
    }

    #[test]
    fn monomial_rendering() {
        let m = Monomial::new(1, vec![2, 1], MultiIndex::from_counts(&[1, 0, 2]));
        assert_eq!(m.render(), "hbar^1 t[0,0,1] s[(1,1),(3,2)]");
        assert_eq!(Monomial::one().render(), "hbar^0 t[] s[]");
    }

    #[test]
    fn exp_of_zero_is_one() {
        let z = TruncatedSeries::<Rational>::zero(cut());
        assert_eq!(z.exponentiate().unwrap(), TruncatedSeries::one(cut()));
    }

    #[test]
    fn exp_of_monomial() {
        let mut f = TruncatedSeries::<Rational>::zero(cut());
        f.add_term(Monomial::t_var(0), Rational::ratio(1, 1));
        let g = f.exponentiate().unwrap();
        for e in 0..=4u32 {
            let m = Monomial::new(0, vec![e], MultiIndex::zero());
            assert_eq!(g.coefficient(&m), Rational::ratio(1, 1) / Rational::from_bigint(&factorial(e)));
        }
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn derivative_and_cutoff() {
        let mut f = TruncatedSeries::<Rational>::zero(cut());
        f.add_term(Monomial::new(0, vec![3], MultiIndex::zero()), Rational::ratio(1, 1));
        f.add_term(Monomial::new(3, vec![], MultiIndex::zero()), Rational::ratio(1, 1));
        assert_eq!(f.len(), 1);
        assert_eq!(f.derivative(0).coefficient(&Monomial::new(0, vec![2], MultiIndex::zero())), Rational::ratio(3, 1));
    }

    /// `(ħ exponent, t exponents, s counts, numerator, denominator)`.
    type RawTerm = (u32, Vec<u32>, Vec<u32>, i64, i64);

    fn small_series() -> impl Strategy<Value = Vec<RawTerm>> {
        prop::collection::vec(
            (0u32..3, prop::collection::vec(0u32..3, 0..3), prop::collection::vec(0u32..2, 0..2), -5i64..6, 1i64..5),
            0..6,
        )
    }

    proptest! {
        #[test]
        fn log_inverts_exp(raw in small_series()) {
            let mut f = TruncatedSeries::<Rational>::zero(cut());
            for (h, t, s, p, q) in raw {
                let m = Monomial::new(h, t, MultiIndex::from_counts(&s));
                if m != Monomial::one() {
                    f.add_term(m, Rational::ratio(p, q));
                }
            }
            prop_assert_eq!(f.exponentiate().unwrap().log().unwrap(), f);
        }
    }
}
