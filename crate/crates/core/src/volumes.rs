//! Volume polynomials `V^Θ_{g,n}`, their normalized and super variants,
//! and the κ-only volume identities.
//!
//! π is never substituted: every term records its even π-power, so all
//! coefficients stay exact.

use std::collections::BTreeMap;
use std::fmt;

use crate::combinatorics::{factorial, mi_binomial, mi_multinomial, split_pairs, MultiIndex};
use crate::correlator::{CorrelatorKey, Engine};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `π^{pi_power} Π L_i^{lengths[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VolumeMonomial {
    pub pi_power: u32,
    pub lengths: Vec<u32>,
}

impl VolumeMonomial {
    pub fn new(pi_power: u32, lengths: Vec<u32>) -> Self {
        Self { pi_power, lengths }
    }

    pub fn length_degree(&self) -> u32 {
        self.lengths.iter().sum()
    }
}

/// Display order: total length degree ascending, then length exponents
/// descending lexicographically, then π-power descending.
impl Ord for VolumeMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.length_degree()
            .cmp(&other.length_degree())
            .then_with(|| other.lengths.cmp(&self.lengths))
            .then_with(|| other.pi_power.cmp(&self.pi_power))
    }
}

impl PartialOrd for VolumeMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumePolynomial<T> {
    arity: usize,
    terms: BTreeMap<VolumeMonomial, T>,
}

impl<T: Scalar> VolumePolynomial<T> {
    pub fn zero(arity: usize) -> Self {
        Self { arity, terms: BTreeMap::new() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&VolumeMonomial, &T)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, monomial: &VolumeMonomial) -> T {
        self.terms.get(monomial).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · monomial`, dropping the term if it cancels.
    pub fn add_term(&mut self, monomial: VolumeMonomial, coeff: T) {
        assert_eq!(monomial.lengths.len(), self.arity, "monomial arity mismatch");
        if coeff.is_zero() {
            return;
        }
        match self.terms.remove(&monomial) {
            Some(existing) => {
                let sum = existing + coeff;
                if !sum.is_zero() {
                    self.terms.insert(monomial, sum);
                }
            }
            None => {
                self.terms.insert(monomial, coeff);
            }
        }
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = Self::zero(self.arity);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * factor.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::InvalidArgument(format!("arity {} vs {}", self.arity, other.arity)));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    /// Multiplies by `L_{index+1}^{power}`.
    pub fn mul_length(&self, index: usize, power: u32) -> Self {
        let mut out = Self::zero(self.arity);
        for (m, c) in &self.terms {
            let mut m = m.clone();
            m.lengths[index] += power;
            out.add_term(m, c.clone());
        }
        out
    }

    /// Substitutes the lengths and groups the result by π-power (ascending),
    /// omitting groups that vanish.
    pub fn evaluate(&self, lengths: &[T]) -> Result<Vec<(u32, T)>> {
        if lengths.len() != self.arity {
            return Err(Error::InvalidArgument(format!(
                "polynomial has {} length variables, got {} values",
                self.arity,
                lengths.len()
            )));
        }
        let mut groups: BTreeMap<u32, T> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in lengths.iter().zip(&m.lengths) {
                v = v * x.pow_u32(e);
            }
            let slot = groups.entry(m.pi_power).or_insert_with(T::zero);
            *slot = slot.clone() + v;
        }
        Ok(groups.into_iter().filter(|(_, v)| !v.is_zero()).collect())
    }

    /// Substitutes `L_i → 2π L_i` and divides by `(2π²)^{g-1}`. For a
    /// degree-pure genus-`g` volume the result is π-free.
    pub fn rescale_to_normalized(&self, g: u32) -> Result<Self> {
        let mut out = Self::zero(self.arity);
        let target = 2 * (g - 1);
        for (m, c) in &self.terms {
            let deg = m.length_degree();
            if m.pi_power + deg != target {
                return Err(Error::InvalidArgument(format!(
                    "term with π^{} and length degree {deg} is not pure of genus {g}",
                    m.pi_power
                )));
            }
            let two_pow = deg as i64 - (g as i64 - 1);
            let factor = if two_pow >= 0 {
                T::from_i64(2).pow_u32(two_pow as u32)
            } else {
                T::one() / T::from_i64(2).pow_u32((-two_pow) as u32)
            };
            out.add_term(VolumeMonomial::new(0, m.lengths.clone()), c.clone() * factor);
        }
        Ok(out)
    }
}

impl<T: Scalar> VolumePolynomial<T> {
    fn render_with(&self, coeff: impl Fn(&T) -> (bool, String)) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let (negative, magnitude) = coeff(c);
            match (k, negative) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mut factors = Vec::new();
            if magnitude != "1" {
                factors.push(magnitude);
            }
            if m.pi_power > 0 {
                factors.push(power("pi", m.pi_power));
            }
            for (i, &e) in m.lengths.iter().enumerate() {
                if e > 0 {
                    factors.push(power(&format!("L{}", i + 1), e));
                }
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

fn power(base: &str, e: u32) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

impl fmt::Display for VolumePolynomial<crate::Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.render_with(|c| {
            (crate::scalar::is_negative(c), crate::scalar::render_rational(&num_traits::Signed::abs(c)))
        });
        f.write_str(&s)
    }
}

impl fmt::Display for VolumePolynomial<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.render_with(|c| (*c < 0.0, format!("{}", c.abs())));
        f.write_str(&s)
    }
}

fn check_gn(g: u32, n: usize) -> Result<()> {
    if g == 0 {
        return Err(Error::InvalidArgument("volumes need genus at least 1".into()));
    }
    if g == 1 && n == 0 {
        return Err(Error::Undefined("V_{1,0} is not defined".into()));
    }
    Ok(())
}

/// Compositions of `total` into `parts` nonnegative integers, lexicographic.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn fact<T: Scalar>(n: u32) -> T {
    T::from_bigint(&factorial(n))
}

/// Correlators `⟨κ_1^{d_0} Π τ_{d_i}⟩_g` over all `d_0 + … + d_n = g-1`.
fn volume_terms<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<Vec<(Vec<u32>, T)>> {
    check_gn(g, n)?;
    compositions(g - 1, n + 1)
        .into_iter()
        .map(|d| {
            let key = CorrelatorKey::new(g, MultiIndex::first(d[0]), d[1..].to_vec());
            Ok((d, engine.value(&key)?))
        })
        .collect()
}

/// `V^Θ_{g,n} = Σ (2π²)^{d_0}/d_0! ⟨κ_1^{d_0} Π τ_{d_i}⟩_g Π L_i^{2d_i}/(2^{d_i} d_i!)`.
pub fn volume_polynomial<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<VolumePolynomial<T>> {
    let mut out = VolumePolynomial::zero(n);
    for (d, value) in volume_terms(engine, g, n)? {
        let mut c = value * T::from_i64(2).pow_u32(d[0]) / fact::<T>(d[0]);
        for &di in &d[1..] {
            c = c / (T::from_i64(2).pow_u32(di) * fact::<T>(di));
        }
        out.add_term(VolumeMonomial::new(2 * d[0], d[1..].iter().map(|x| 2 * x).collect()), c);
    }
    Ok(out)
}

/// `v^Θ_{g,n} = Σ ⟨κ_1^{d_0} Π τ_{d_i}⟩_g Π L_i^{2d_i} / Π_{i≥0} d_i!`.
pub fn normalized_volume<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<VolumePolynomial<T>> {
    let mut out = VolumePolynomial::zero(n);
    for (d, value) in volume_terms(engine, g, n)? {
        let denom = d.iter().fold(T::one(), |acc, &x| acc * fact::<T>(x));
        out.add_term(VolumeMonomial::new(0, d[1..].iter().map(|x| 2 * x).collect()), value / denom);
    }
    Ok(out)
}

/// `V̂_{g,n} = 2^{1-g-n} V^Θ_{g,n}`.
pub fn super_volume<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<VolumePolynomial<T>> {
    let v = volume_polynomial(engine, g, n)?;
    let factor = T::one() / T::from_i64(2).pow_u32(g + n as u32 - 1);
    Ok(v.scale(&factor))
}

/// `V^Θ_{g,n}(κ(b)) = ⟨τ_0^n κ(b)⟩_g`; the `n = 0` case goes through the
/// reduction to one marked point.
pub fn higher_volume<T: Scalar>(engine: &Engine<T>, g: u32, n: usize, b: &MultiIndex) -> Result<T> {
    check_gn(g, n)?;
    if n == 0 {
        return engine.n0_reduce(g, b);
    }
    engine.value(&CorrelatorKey::new(g, b.clone(), vec![0; n]))
}

/// `V_{g,n+1}(κ(b)) − (2g-2+n+||b||) V_{g,n}(κ(b)) − Σ_{L+L'=b, ||L'||≥2} binom(b,L) V_{g,n}(κ(L) κ_{|L'|})`.
pub fn thm16_residual<T: Scalar>(engine: &Engine<T>, g: u32, n: usize, b: &MultiIndex) -> Result<T> {
    let lhs = higher_volume(engine, g, n + 1, b)?;
    let factor = T::from_i64(2 * g as i64 - 2 + n as i64 + b.size() as i64);
    let mut rhs = factor * higher_volume(engine, g, n, b)?;
    for (l, lp) in split_pairs(b) {
        if lp.size() < 2 {
            continue;
        }
        let merged = l.add(&MultiIndex::delta(lp.weight() as usize));
        rhs = rhs + T::from_bigint(&mi_binomial(b, &l)) * higher_volume(engine, g, n, &merged)?;
    }
    Ok(lhs - rhs)
}

/// The two readings of the κ-only recursion without marked points: the
/// statement, whose last sum has no coefficient, and the reading with
/// `binom(b,L)` in that sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Thm17Variant {
    AsStated,
    WithBinomial,
}

impl Thm17Variant {
    pub const ALL: [Thm17Variant; 2] = [Thm17Variant::AsStated, Thm17Variant::WithBinomial];

    pub fn name(self) -> &'static str {
        match self {
            Thm17Variant::AsStated => "as_stated",
            Thm17Variant::WithBinomial => "with_binomial",
        }
    }
}

/// `||b|| V_g(κ(b)) − Σ_{L+L_1+L_2=b, ||L||≥1} (-1)^{||L||-1} binom(b; L,L_1,L_2) V_g(κ(L_1) κ_{|L|+|L_2|})
///  + Σ_{L+L'=b, ||L'||≥2} c_L V_g(κ(L) κ_{|L'|})`, with `c_L = 1` or `binom(b,L)`.
pub fn thm17_residual<T: Scalar>(engine: &Engine<T>, g: u32, b: &MultiIndex, variant: Thm17Variant) -> Result<T> {
    if g < 2 {
        return Err(Error::InvalidArgument(format!("needs genus at least 2, got {g}")));
    }
    if b.is_zero() {
        return Err(Error::InvalidArgument("needs a nonzero κ multi-index".into()));
    }
    let v = |m: &MultiIndex| higher_volume(engine, g, 0, m);
    let mut residual = T::from_i64(b.size() as i64) * v(b)?;
    for (l, rest) in split_pairs(b) {
        if l.size() == 0 {
            continue;
        }
        let sign = if (l.size() - 1) % 2 == 0 { T::one() } else { -T::one() };
        for (l1, l2) in split_pairs(&rest) {
            let m = T::from_bigint(&mi_multinomial(b, &[l.clone(), l1.clone(), l2.clone()]));
            let merged = l1.add(&MultiIndex::delta((l.weight() + l2.weight()) as usize));
            residual = residual - sign.clone() * m * v(&merged)?;
        }
    }
    for (l, lp) in split_pairs(b) {
        if lp.size() < 2 {
            continue;
        }
        let c = match variant {
            Thm17Variant::AsStated => T::one(),
            Thm17Variant::WithBinomial => T::from_bigint(&mi_binomial(b, &l)),
        };
        let merged = l.add(&MultiIndex::delta(lp.weight() as usize));
        residual = residual + c * v(&merged)?;
    }
    Ok(residual)
}
