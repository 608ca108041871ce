use std::collections::BTreeMap;

use crate::combinatorics::{binomial, dfact_s, indices_of_weight, Coefficients, MultiIndex};
use crate::scalar::Scalar;

use super::series::{Monomial, SeriesCutoff, TruncatedSeries};

/// One normal-ordered term `coefficient monomial · Π ∂_{t_i}^{partials[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorTerm {
    pub coefficient: Monomial,
    pub partials: Vec<u32>,
}

impl OperatorTerm {
    pub fn new(coefficient: Monomial, partials: Vec<u32>) -> Self {
        let mut partials = partials;
        while partials.last() == Some(&0) {
            partials.pop();
        }
        Self { coefficient, partials }
    }

    fn max_index(&self) -> Option<u32> {
        let p = self.partials.len() as u32;
        let c = self.coefficient.t.len() as u32;
        p.max(c).checked_sub(1)
    }
}

/// A differential operator in `t` with coefficients polynomial in `ħ, t, s`,
/// restricted to terms whose `t` indices are at most `index_bound` and whose
/// `s`-weight is at most `max_s_weight`.
///
/// `exact_t_index` records how far the restriction is harmless: applied to
/// anything, the operator produces the true coefficients at every output
/// monomial with `t` indices `≤ exact_t_index` and `s`-weight `≤ max_s_weight`.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialOperator<T> {
    terms: BTreeMap<OperatorTerm, T>,
    index_bound: u32,
    max_s_weight: u32,
    exact_t_index: Option<u32>,
}

fn falling(n: u32, k: u32) -> i64 {
    (0..k).map(|i| (n - i) as i64).product()
}

impl<T: Scalar> DifferentialOperator<T> {
    pub fn zero(index_bound: u32, max_s_weight: u32, exact_t_index: Option<u32>) -> Self {
        Self { terms: BTreeMap::new(), index_bound, max_s_weight, exact_t_index }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OperatorTerm, &T)> {
        self.terms.iter()
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

    pub fn index_bound(&self) -> u32 {
        self.index_bound
    }

    pub fn max_s_weight(&self) -> u32 {
        self.max_s_weight
    }

    pub fn exact_t_index(&self) -> Option<u32> {
        self.exact_t_index
    }

    pub fn coefficient(&self, term: &OperatorTerm) -> T {
        self.terms.get(term).cloned().unwrap_or_else(T::zero)
    }

    /// Adds `value · term` unless the term lies outside the bounds.
    pub fn add_term(&mut self, term: OperatorTerm, value: T) {
        if value.is_zero() || term.coefficient.s.weight() > self.max_s_weight {
            return;
        }
        if term.max_index().is_some_and(|i| i > self.index_bound) {
            return;
        }
        match self.terms.remove(&term) {
            Some(old) => {
                let sum = old + value;
                if !sum.is_zero() {
                    self.terms.insert(term, sum);
                }
            }
            None => {
                self.terms.insert(term, value);
            }
        }
    }

    fn merged_bounds(&self, other: &Self) -> Self {
        let exact = match (self.exact_t_index, other.exact_t_index) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        Self::zero(self.index_bound.min(other.index_bound), self.max_s_weight.min(other.max_s_weight), exact)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.merged_bounds(other);
        for (t, v) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(t.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = Self::zero(self.index_bound, self.max_s_weight, self.exact_t_index);
        for (t, v) in &self.terms {
            out.add_term(t.clone(), v.clone() * factor.clone());
        }
        out
    }

    /// Left multiplication by `value · m`.
    pub fn mul_monomial(&self, m: &Monomial, value: &T) -> Self {
        let mut out = Self::zero(self.index_bound, self.max_s_weight, self.exact_t_index);
        for (t, v) in &self.terms {
            out.add_term(OperatorTerm::new(t.coefficient.mul(m), t.partials.clone()), v.clone() * value.clone());
        }
        out
    }

    /// `self ∘ other`, normal ordered by the Leibniz rule.
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = self.merged_bounds(other);
        for (a, va) in &self.terms {
            for (b, vb) in &other.terms {
                // ∂^P (c f) = Σ_{Q ≤ P} binom(P,Q) (∂^Q c) ∂^{P-Q} f
                let mut choices: Vec<(Vec<u32>, i64)> = vec![(Vec::new(), 1)];
                for (i, &p) in a.partials.iter().enumerate() {
                    let available = b.coefficient.t_exp(i as u32).min(p);
                    let mut next = Vec::new();
                    for (q, w) in &choices {
                        for take in 0..=available {
                            let mut q2 = q.clone();
                            q2.push(take);
                            let factor = i64::try_from(binomial(p, take)).expect("small binomial")
                                * falling(b.coefficient.t_exp(i as u32), take);
                            next.push((q2, w * factor));
                        }
                    }
                    choices = next;
                }
                for (q, weight) in choices {
                    let q_mono = Monomial::new(0, q.clone(), MultiIndex::zero());
                    let reduced = b.coefficient.checked_div(&q_mono).expect("Q divides the coefficient");
                    let len = a.partials.len().max(b.partials.len());
                    let partials = (0..len)
                        .map(|i| {
                            a.partials.get(i).copied().unwrap_or(0) - q.get(i).copied().unwrap_or(0)
                                + b.partials.get(i).copied().unwrap_or(0)
                        })
                        .collect();
                    out.add_term(
                        OperatorTerm::new(a.coefficient.mul(&reduced), partials),
                        va.clone() * vb.clone() * T::from_i64(weight),
                    );
                }
            }
        }
        out
    }

    /// `[self, other] = self ∘ other − other ∘ self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Literal term-by-term application. The result is not truncated.
    pub fn apply(&self, series: &TruncatedSeries<T>) -> BTreeMap<Monomial, T> {
        let mut out: BTreeMap<Monomial, T> = BTreeMap::new();
        for (term, v) in &self.terms {
            let p = Monomial::new(0, term.partials.clone(), MultiIndex::zero());
            for (m, c) in series.terms() {
                let Some(rest) = m.checked_div(&p) else { continue };
                let factor =
                    term.partials.iter().enumerate().fold(1i64, |acc, (i, &k)| acc * falling(m.t_exp(i as u32), k));
                let value = v.clone() * c.clone() * T::from_i64(factor);
                let slot = out.entry(rest.mul(&term.coefficient)).or_insert_with(T::zero);
                *slot = slot.clone() + value;
            }
        }
        out
    }

    /// Whether the coefficient of `output` in `self(f)` is determined by the
    /// coefficients of `f` inside `input`.
    pub fn is_reliable(&self, output: &Monomial, input: &SeriesCutoff) -> bool {
        let Some(exact) = self.exact_t_index else { return false };
        if output.max_t_index().is_some_and(|i| i > exact) || output.s.weight() > self.max_s_weight {
            return false;
        }
        self.terms.keys().all(|term| match output.checked_div(&term.coefficient) {
            Some(rest) => input.contains(&rest.mul_t(&term.partials)),
            None => true,
        })
    }
}

/// Which Virasoro family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorFamily {
    /// `V̂_k`, with `β_L s^L` coefficients.
    Hat,
    /// `V_k = Σ_L γ_L s^L V̂_{k+|L|}`.
    Plain,
}

impl OperatorFamily {
    pub fn name(self) -> &'static str {
        match self {
            OperatorFamily::Hat => "hat",
            OperatorFamily::Plain => "plain",
        }
    }
}

fn s_indices(max_weight: u32) -> Vec<MultiIndex> {
    (0..=max_weight).flat_map(indices_of_weight).collect()
}

fn exact_index(cutoff: &SeriesCutoff, k: u32) -> Option<u32> {
    cutoff.max_t_index.checked_sub(cutoff.max_s_weight + k)
}

fn s_mono(l: &MultiIndex) -> Monomial {
    Monomial::new(0, Vec::new(), l.clone())
}

/// `V̂_k = −(2k+1)!!/2 ∂_k
///  + ½ Σ_L Σ_j (2|L|+2j+2k+1)!!/(2j-1)!! β_L s^L t_j ∂_{|L|+j+k}
///  + ħ/4 Σ_L Σ_{i+j=|L|+k-1} (2i+1)!!(2j+1)!! β_L s^L ∂_i ∂_j
///  + δ_{k,0}/16`,
/// restricted to `t` indices `≤ cutoff.max_t_index` and `s`-weight
/// `≤ cutoff.max_s_weight`.
pub fn virasoro_hat<T: Scalar>(coeffs: &Coefficients<T>, k: u32, cutoff: &SeriesCutoff) -> DifferentialOperator<T> {
    let bound = cutoff.max_t_index;
    let mut op = DifferentialOperator::zero(bound, cutoff.max_s_weight, exact_index(cutoff, k));
    let mut dk = vec![0; k as usize + 1];
    dk[k as usize] = 1;
    op.add_term(OperatorTerm::new(Monomial::one(), dk), -dfact_s::<T>(2 * k as i64 + 1) / T::from_i64(2));
    for l in s_indices(cutoff.max_s_weight) {
        let beta = coeffs.beta(&l);
        let w = l.weight();
        for j in 0..=bound {
            let target = w + j + k;
            if target > bound {
                break;
            }
            let mut partial = vec![0; target as usize + 1];
            partial[target as usize] = 1;
            let value =
                dfact_s::<T>(2 * target as i64 + 1) / dfact_s::<T>(2 * j as i64 - 1) * beta.clone() / T::from_i64(2);
            op.add_term(OperatorTerm::new(s_mono(&l).mul(&Monomial::t_var(j)), partial), value);
        }
        add_second_order(&mut op, (w + k).checked_sub(1), &l, &beta);
    }
    if k == 0 {
        op.add_term(OperatorTerm::new(Monomial::one(), Vec::new()), T::ratio(1, 16));
    }
    op
}

/// `ħ/4 Σ_{i+j=total} (2i+1)!!(2j+1)!! value s^L ∂_i ∂_j`.
fn add_second_order<T: Scalar>(op: &mut DifferentialOperator<T>, total: Option<u32>, l: &MultiIndex, value: &T) {
    let Some(total) = total else { return };
    let hbar = Monomial::new(1, Vec::new(), l.clone());
    for i in 0..=total {
        let j = total - i;
        let mut partials = vec![0; total as usize + 1];
        partials[i as usize] += 1;
        partials[j as usize] += 1;
        let c = dfact_s::<T>(2 * i as i64 + 1) * dfact_s::<T>(2 * j as i64 + 1) * value.clone() / T::from_i64(4);
        op.add_term(OperatorTerm::new(hbar.clone(), partials), c);
    }
}

/// `V_k = −½ Σ_L (2|L|+2k+1)!! γ_L s^L ∂_{|L|+k}
///  + ½ Σ_j (2j+2k+1)!!/(2j-1)!! t_j ∂_{j+k}
///  + ħ/4 Σ_{i+j=k-1} (2i+1)!!(2j+1)!! ∂_i ∂_j + δ_{k,0}/16`.
pub fn virasoro_v<T: Scalar>(coeffs: &Coefficients<T>, k: u32, cutoff: &SeriesCutoff) -> DifferentialOperator<T> {
    let bound = cutoff.max_t_index;
    let mut op = DifferentialOperator::zero(bound, cutoff.max_s_weight, exact_index(cutoff, k));
    for l in s_indices(cutoff.max_s_weight) {
        let target = l.weight() + k;
        let mut partial = vec![0; target as usize + 1];
        partial[target as usize] = 1;
        let value = -dfact_s::<T>(2 * target as i64 + 1) * coeffs.gamma(&l) / T::from_i64(2);
        op.add_term(OperatorTerm::new(s_mono(&l), partial), value);
    }
    for j in 0..=bound.saturating_sub(k) {
        let target = j + k;
        let mut partial = vec![0; target as usize + 1];
        partial[target as usize] = 1;
        let value = dfact_s::<T>(2 * target as i64 + 1) / dfact_s::<T>(2 * j as i64 - 1) / T::from_i64(2);
        op.add_term(OperatorTerm::new(Monomial::t_var(j), partial), value);
    }
    add_second_order(&mut op, k.checked_sub(1), &MultiIndex::zero(), &T::one());
    if k == 0 {
        op.add_term(OperatorTerm::new(Monomial::one(), Vec::new()), T::ratio(1, 16));
    }
    op
}

/// `Σ_L γ_L s^L V̂_{k+|L|}`, which must coincide with [`virasoro_v`].
pub fn virasoro_v_from_hat<T: Scalar>(
    coeffs: &Coefficients<T>,
    k: u32,
    cutoff: &SeriesCutoff,
) -> DifferentialOperator<T> {
    let mut op = DifferentialOperator::zero(cutoff.max_t_index, cutoff.max_s_weight, exact_index(cutoff, k));
    for l in s_indices(cutoff.max_s_weight) {
        let hat = virasoro_hat(coeffs, k + l.weight(), cutoff);
        op = op.add(&hat.mul_monomial(&s_mono(&l), &coeffs.gamma(&l)));
    }
    op.exact_t_index = exact_index(cutoff, k);
    op
}

/// Builds `V̂_k` or `V_k`.
pub fn virasoro<T: Scalar>(
    coeffs: &Coefficients<T>,
    family: OperatorFamily,
    k: u32,
    cutoff: &SeriesCutoff,
) -> DifferentialOperator<T> {
    match family {
        OperatorFamily::Hat => virasoro_hat(coeffs, k, cutoff),
        OperatorFamily::Plain => virasoro_v(coeffs, k, cutoff),
    }
}

/// `[A_n, A_m] − (n−m) · RHS`, with `RHS = Σ_L β_L s^L V̂_{n+m+|L|}` for the
/// hatted family and `V_{n+m}` for the plain one.
pub fn commutator_residual<T: Scalar>(
    coeffs: &Coefficients<T>,
    family: OperatorFamily,
    n: u32,
    m: u32,
    cutoff: &SeriesCutoff,
) -> DifferentialOperator<T> {
    let a = virasoro(coeffs, family, n, cutoff);
    let b = virasoro(coeffs, family, m, cutoff);
    let bracket = a.commutator(&b);
    let rhs = match family {
        OperatorFamily::Hat => {
            let mut rhs = DifferentialOperator::zero(cutoff.max_t_index, cutoff.max_s_weight, None);
            for l in s_indices(cutoff.max_s_weight) {
                let hat = virasoro_hat(coeffs, n + m + l.weight(), cutoff);
                rhs = rhs.add(&hat.mul_monomial(&s_mono(&l), &coeffs.beta(&l)));
            }
            rhs
        }
        OperatorFamily::Plain => virasoro_v(coeffs, n + m, cutoff),
    };
    let factor = T::from_i64(n as i64 - m as i64);
    bracket.sub(&rhs.scale(&factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn term(coefficient: Monomial, partials: Vec<u32>) -> OperatorTerm {
        OperatorTerm::new(coefficient, partials)
    }

    #[test]
    fn v_hat_zero_without_s() {
        let c = Coefficients::<Rational>::new();
        let cut = SeriesCutoff::new(3, 3, 3, 0);
        let op = virasoro_hat(&c, 0, &cut);
        assert_eq!(op.coefficient(&term(Monomial::one(), vec![1])), q(-1, 2));
        for j in 0..=3u32 {
            let mut p = vec![0; j as usize + 1];
            p[j as usize] = 1;
            let expected = if j == 0 { q(1, 2) } else { q(2 * j as i64 + 1, 2) };
            assert_eq!(op.coefficient(&term(Monomial::t_var(j), p)), expected);
        }
        assert_eq!(op.coefficient(&term(Monomial::one(), vec![])), q(1, 16));
        assert_eq!(op.len(), 6);
        assert!(virasoro_hat(&c, 1, &cut).coefficient(&term(Monomial::one(), vec![])) == q(0, 1));
    }

    #[test]
    fn v_hat_s_string_coefficient() {
        let c = Coefficients::<Rational>::new();
        let op = virasoro_hat(&c, 0, &SeriesCutoff::new(3, 3, 3, 1));
        let coeff = Monomial::new(0, vec![1], MultiIndex::delta(1));
        assert_eq!(op.coefficient(&term(coeff, vec![0, 1])), q(3, 2));
    }

    #[test]
    fn plain_family_two_ways() {
        let c = Coefficients::<Rational>::new();
        let cut = SeriesCutoff::new(3, 3, 8, 3);
        for k in 0..=3 {
            assert_eq!(virasoro_v(&c, k, &cut), virasoro_v_from_hat(&c, k, &cut), "k={k}");
        }
        let flat = SeriesCutoff::new(3, 3, 5, 0);
        for k in 0..=2 {
            assert_eq!(virasoro_v(&c, k, &flat).terms, virasoro_hat(&c, k, &flat).terms);
        }
    }

    #[test]
    fn commutators_vanish() {
        let c = Coefficients::<Rational>::new();
        let cut = SeriesCutoff::new(3, 3, 8, 2);
        for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
            for n in 0..=2 {
                for m in 0..n {
                    assert!(commutator_residual(&c, family, n, m, &cut).is_zero(), "{family:?} {n} {m}");
                }
            }
        }
        assert!(virasoro_v(&c, 0, &cut).commutator(&virasoro_v(&c, 0, &cut)).is_zero());
    }

    #[test]
    fn compose_leibniz() {
        // ∂_0 ∘ t_0 = t_0 ∂_0 + 1
        let mut d0 = DifferentialOperator::<Rational>::zero(3, 0, Some(3));
        d0.add_term(term(Monomial::one(), vec![1]), q(1, 1));
        let mut t0 = DifferentialOperator::<Rational>::zero(3, 0, Some(3));
        t0.add_term(term(Monomial::t_var(0), vec![]), q(1, 1));
        let c = d0.compose(&t0);
        assert_eq!(c.coefficient(&term(Monomial::t_var(0), vec![1])), q(1, 1));
        assert_eq!(c.coefficient(&term(Monomial::one(), vec![])), q(1, 1));
        assert_eq!(c.len(), 2);
    }
}
