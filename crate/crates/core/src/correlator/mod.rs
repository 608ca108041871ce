//! Memoized evaluation of `⟨κ(b) Π τ_{d_i}⟩^Θ_g`.
//!
//! Four independent routes are available:
//!
//! * [`Strategy::KmzDvv`] rewrites κ-monomials as pure-ψ correlators with
//!   extra insertions and then runs the DVV-type recursion on the largest
//!   ψ exponent. This is the default.
//! * [`Strategy::Thm14`] solves the alternating κ/ψ recursion for its
//!   `L = 0` term.
//! * [`Strategy::Thm15`] evaluates the α-weighted recursion directly.
//! * [`Strategy::Closed`] uses the genus-one, one-point and two-point
//!   closed formulas where they apply.
//!
//! Each route keeps its own memo table so that agreement between routes is
//! a real check. Finished values are published into a shared table; a
//! second route producing a different value for a published key is an
//! [`Error::Inconsistent`].

mod closed;
mod identities;
mod key;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use dashmap::mapref::entry::Entry;
use dashmap::DashMap;
use num_bigint::BigInt;

pub use closed::{closed_genus1, closed_one_point, closed_two_point};
pub use identities::IdentityKind;
pub use key::CorrelatorKey;

use crate::combinatorics::{
    binomial, dfact, dfact_s, indices_of_size, mi_binomial, mi_multinomial, split_pairs, splits, Coefficients,
    MultiIndex,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    KmzDvv,
    Thm14,
    Thm15,
    Closed,
}

impl Strategy {
    pub const RECURSIVE: [Strategy; 3] = [Strategy::KmzDvv, Strategy::Thm14, Strategy::Thm15];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::KmzDvv => "kmz",
            Strategy::Thm14 => "thm14",
            Strategy::Thm15 => "thm15",
            Strategy::Closed => "closed",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    /// Lookups answered from the published table.
    pub cache_hits: u64,
    /// Top-level evaluations that ran a strategy.
    pub computed: u64,
}

type PureKey = (u32, Vec<u32>);
type Expansion<T> = Arc<Vec<(T, Vec<u32>)>>;

pub struct Engine<T> {
    coeffs: Coefficients<T>,
    pure: DashMap<PureKey, T>,
    kmz: DashMap<MultiIndex, Expansion<T>>,
    thm14: DashMap<CorrelatorKey, T>,
    thm15: DashMap<CorrelatorKey, T>,
    published: DashMap<CorrelatorKey, T>,
    hits: AtomicU64,
    computed: AtomicU64,
}

impl<T: Scalar> Default for Engine<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Unordered splittings `I ⊔ J` of a multiset, with the number of ordered
/// index-set splittings each one stands for.
fn point_splits(points: &[u32]) -> Vec<(Vec<u32>, Vec<u32>, BigInt)> {
    let mut groups: Vec<(u32, u32)> = Vec::new();
    for &p in points {
        match groups.iter_mut().find(|(v, _)| *v == p) {
            Some((_, c)) => *c += 1,
            None => groups.push((p, 1)),
        }
    }
    let mut out = vec![(Vec::new(), Vec::new(), BigInt::from(1))];
    for &(value, count) in &groups {
        let mut next = Vec::with_capacity(out.len() * (count as usize + 1));
        for (i, j, mult) in &out {
            for take in 0..=count {
                let mut i2 = i.clone();
                let mut j2 = j.clone();
                i2.extend(std::iter::repeat_n(value, take as usize));
                j2.extend(std::iter::repeat_n(value, (count - take) as usize));
                next.push((i2, j2, mult * binomial(count, take)));
            }
        }
        out = next;
    }
    out
}

/// Degree-valid keys with `1 ≤ g ≤ max_genus`, at most `max_points` ψ
/// insertions and `||b|| ≤ max_kappa`, in canonical order. `g = 1` keys
/// without marked points are left out.
pub fn degree_valid_keys(max_genus: u32, max_points: usize, max_kappa: u32) -> Vec<CorrelatorKey> {
    fn partitions(rem: u32, max_part: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            for zeros in 0..=left {
                let mut v = cur.clone();
                v.extend(std::iter::repeat_n(0, zeros));
                out.push(v);
            }
            return;
        }
        if left == 0 {
            return;
        }
        for p in (1..=max_part.min(rem)).rev() {
            cur.push(p);
            partitions(rem - p, p, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for g in 1..=max_genus {
        for size in 0..=max_kappa {
            for b in indices_of_size(size, g - 1) {
                let mut psis = Vec::new();
                let rem = g - 1 - b.weight();
                partitions(rem, rem, max_points, &mut Vec::new(), &mut psis);
                for psi in psis {
                    if g == 1 && psi.is_empty() {
                        continue;
                    }
                    out.push(CorrelatorKey::new(g, b.clone(), psi));
                }
            }
        }
    }
    out.sort();
    out
}

fn with_points(base: &[u32], extra: &[u32]) -> Vec<u32> {
    let mut v = base.to_vec();
    v.extend_from_slice(extra);
    v
}

fn without(points: &[u32], pos: usize) -> Vec<u32> {
    let mut v = points.to_vec();
    v.remove(pos);
    v
}

fn sign<T: Scalar>(exponent: u32) -> T {
    if exponent.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

fn df_ratio<T: Scalar>(numer: i64, denom: i64) -> T {
    dfact_s::<T>(numer) / dfact_s::<T>(denom)
}

impl<T: Scalar> Engine<T> {
    pub fn new() -> Self {
        Self {
            coeffs: Coefficients::new(),
            pure: DashMap::new(),
            kmz: DashMap::new(),
            thm14: DashMap::new(),
            thm15: DashMap::new(),
            published: DashMap::new(),
            hits: AtomicU64::new(0),
            computed: AtomicU64::new(0),
        }
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.coeffs
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats { cache_hits: self.hits.load(Ordering::Relaxed), computed: self.computed.load(Ordering::Relaxed) }
    }

    /// Vanishing and undefined cases shared by every strategy.
    fn trivial(key: &CorrelatorKey) -> Result<Option<T>> {
        if key.genus == 0 {
            return Ok(Some(T::zero()));
        }
        if key.genus == 1 && key.psi.is_empty() {
            return Err(Error::Undefined(format!("{key}: genus one with no marked points")));
        }
        if !key.is_degree_valid() {
            return Ok(Some(T::zero()));
        }
        Ok(None)
    }

    /// Evaluates `key` with `strategy` and publishes the result, failing if
    /// a different value was already published for the same key.
    pub fn correlator(&self, key: &CorrelatorKey, strategy: Strategy) -> Result<T> {
        let key = CorrelatorKey::new(key.genus, key.kappa.clone(), key.psi.clone());
        if let Some(v) = Self::trivial(&key)? {
            return Ok(v);
        }
        let value = match strategy {
            Strategy::Closed => self.closed_value(&key)?,
            s => self.eval(s, key.genus as i64, &key.kappa, &key.psi),
        };
        self.computed.fetch_add(1, Ordering::Relaxed);
        self.publish(&key, value)
    }

    /// The published value if there is one, otherwise the default strategy.
    pub fn value(&self, key: &CorrelatorKey) -> Result<T> {
        let key = CorrelatorKey::new(key.genus, key.kappa.clone(), key.psi.clone());
        if let Some(v) = Self::trivial(&key)? {
            return Ok(v);
        }
        if let Some(v) = self.published.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v.clone());
        }
        self.correlator(&key, Strategy::KmzDvv)
    }

    /// Records a value for `key`; the first value wins and later ones must
    /// agree with it.
    pub fn publish(&self, key: &CorrelatorKey, value: T) -> Result<T> {
        match self.published.entry(key.clone()) {
            Entry::Occupied(existing) => {
                if existing.get().agrees(&value) {
                    Ok(existing.get().clone())
                } else {
                    Err(Error::Inconsistent {
                        key: key.to_string(),
                        first: existing.get().render(),
                        second: value.render(),
                    })
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(value.clone());
                Ok(value)
            }
        }
    }

    /// All published values in canonical key order.
    pub fn published(&self) -> Vec<(CorrelatorKey, T)> {
        let mut out: Vec<_> = self.published.iter().map(|e| (e.key().clone(), e.value().clone())).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// The published value for a canonical `key`, without touching the
    /// counters.
    pub fn published_value(&self, key: &CorrelatorKey) -> Option<T> {
        self.published.get(key).map(|v| v.clone())
    }

    pub fn published_len(&self) -> usize {
        self.published.len()
    }

    fn closed_value(&self, key: &CorrelatorKey) -> Result<T> {
        let not_applicable = || Error::NotApplicable { strategy: "closed".into(), key: key.to_string() };
        if !key.kappa.is_zero() {
            return Err(not_applicable());
        }
        match (key.genus, key.n()) {
            (1, n) => closed_genus1(n as u32),
            (g, 1) => closed_one_point(g),
            (g, 2) => closed_two_point(g, key.psi[1]),
            _ => Err(not_applicable()),
        }
    }

    /// Recursive evaluation inside a strategy. `g ≤ 0` and degree-violating
    /// keys vanish.
    fn eval(&self, s: Strategy, g: i64, kappa: &MultiIndex, psi: &[u32]) -> T {
        if g <= 0 {
            return T::zero();
        }
        let g = g as u32;
        let degree = kappa.weight() + psi.iter().sum::<u32>();
        if degree != g - 1 {
            return T::zero();
        }
        let mut psi = psi.to_vec();
        psi.sort_unstable_by(|a, b| b.cmp(a));
        if psi.is_empty() {
            assert!(g >= 2, "recursion reached genus one with no marked points");
            if s == Strategy::KmzDvv {
                return self.kmz_value(g, kappa, &psi);
            }
            return self.n0_with(s, g, kappa);
        }
        match s {
            Strategy::KmzDvv => self.kmz_value(g, kappa, &psi),
            Strategy::Thm14 => {
                let key = CorrelatorKey { genus: g, kappa: kappa.clone(), psi };
                if let Some(v) = self.thm14.get(&key) {
                    return v.clone();
                }
                let v = self.thm14_at(g, &key.kappa, &key.psi, 0);
                self.thm14.entry(key).or_insert(v).clone()
            }
            Strategy::Thm15 => {
                let key = CorrelatorKey { genus: g, kappa: kappa.clone(), psi };
                if let Some(v) = self.thm15.get(&key) {
                    return v.clone();
                }
                let v = self.thm15_at(g, &key.kappa, &key.psi, 0);
                self.thm15.entry(key).or_insert(v).clone()
            }
            Strategy::Closed => unreachable!("closed formulas are not recursive"),
        }
    }

    /// `⟨κ(b)⟩_g = 1/(2g-2) Σ_{L+L'=b} (-1)^{||L||} binom(b,L) ⟨τ_{|L|} κ(L')⟩_g`.
    fn n0_with(&self, s: Strategy, g: u32, b: &MultiIndex) -> T {
        debug_assert!(g >= 2);
        let mut acc = T::zero();
        for (l, lp) in split_pairs(b) {
            let term = self.eval(s, g as i64, &lp, &[l.weight()]);
            acc = acc + sign::<T>(l.size()) * T::from_bigint(&mi_binomial(b, &l)) * term;
        }
        acc / T::from_i64(2 * g as i64 - 2)
    }

    /// Reduces an `n = 0` correlator to `n = 1` correlators. Needs `g ≥ 2`.
    pub fn n0_reduce(&self, g: u32, b: &MultiIndex) -> Result<T> {
        if g <= 1 {
            return Err(Error::Undefined(format!("n = 0 reduction divides by 2g-2 = {}", 2 * g as i64 - 2)));
        }
        if b.weight() != g - 1 {
            return Ok(T::zero());
        }
        Ok(self.n0_with(Strategy::KmzDvv, g, b))
    }

    /// Pure-ψ correlator by the DVV-type recursion, peeling the largest
    /// exponent `k`:
    ///
    /// `(2k+1)!! ⟨τ_k Π τ_{d_i}⟩_g = Σ_i (2k+2d_i+1)!!/(2d_i-1)!! ⟨τ_{k+d_i} Π_{j≠i} τ_{d_j}⟩_g
    ///  + ½ Σ_{r+s=k-1} (2r+1)!!(2s+1)!! [⟨τ_r τ_s Π τ_{d_i}⟩_{g-1}
    ///  + Σ_{g_1+g_2=g, I⊔J} ⟨τ_r τ_I⟩_{g_1} ⟨τ_s τ_J⟩_{g_2}]`,
    ///
    /// starting from `⟨τ_0⟩_1 = 1/8`.
    pub fn pure_psi_dvv(&self, g: u32, d: &[u32]) -> T {
        let mut d = d.to_vec();
        d.sort_unstable_by(|a, b| b.cmp(a));
        self.pure_value(g as i64, d)
    }

    fn pure_value(&self, g: i64, mut d: Vec<u32>) -> T {
        if g <= 0 || d.is_empty() {
            return T::zero();
        }
        if d.iter().sum::<u32>() as i64 != g - 1 {
            return T::zero();
        }
        d.sort_unstable_by(|a, b| b.cmp(a));
        let g = g as u32;
        if g == 1 && d == [0] {
            return T::ratio(1, 8);
        }
        let key = (g, d);
        if let Some(v) = self.pure.get(&key) {
            return v.clone();
        }
        let d = &key.1;
        let k = d[0];
        let rest = &d[1..];
        let mut acc = T::zero();
        for (i, &di) in rest.iter().enumerate() {
            let mut pts = without(rest, i);
            pts.push(k + di);
            let w = df_ratio::<T>(2 * (k + di) as i64 + 1, 2 * di as i64 - 1);
            acc = acc + w * self.pure_value(g as i64, pts);
        }
        let half = T::ratio(1, 2);
        for r in 0..k {
            let s = k - 1 - r;
            let w = T::from_bigint(&(dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1)));
            let mut inner = self.pure_value(g as i64 - 1, with_points(rest, &[r, s]));
            for (i, j, mult) in point_splits(rest) {
                let g1 = i.iter().sum::<u32>() + r + 1;
                if g1 >= g {
                    continue;
                }
                let left = self.pure_value(g1 as i64, with_points(&i, &[r]));
                let right = self.pure_value((g - g1) as i64, with_points(&j, &[s]));
                inner = inner + T::from_bigint(&mult) * left * right;
            }
            acc = acc + half.clone() * w * inner;
        }
        let v = acc / dfact_s::<T>(2 * k as i64 + 1);
        self.pure.entry(key).or_insert(v).clone()
    }

    /// Expansion of `κ(b)` as pure-ψ insertions:
    /// `Σ_k (-1)^{||b||-k}/k! Σ_{m_1+…+m_k=b, m_i≠0} binom(b; m) Π_j τ_{|m_j|}`,
    /// aggregated by insertion multiset (sorted descending), zero terms dropped.
    pub fn kmz_expand(&self, b: &MultiIndex) -> Vec<(T, Vec<u32>)> {
        self.kmz_expansion(b).as_ref().clone()
    }

    fn kmz_expansion(&self, b: &MultiIndex) -> Expansion<T> {
        if let Some(e) = self.kmz.get(b) {
            return e.clone();
        }
        let mut terms: Vec<(Vec<u32>, T)> = Vec::new();
        if b.is_zero() {
            terms.push((Vec::new(), T::one()));
        }
        let total = b.size();
        for k in 1..=total as usize {
            let coef = sign::<T>(total - k as u32) / T::from_bigint(&crate::combinatorics::factorial(k as u32));
            for parts in splits(b, k, true) {
                let mut ins: Vec<u32> = parts.iter().map(MultiIndex::weight).collect();
                ins.sort_unstable_by(|a, b| b.cmp(a));
                let c = coef.clone() * T::from_bigint(&mi_multinomial(b, &parts));
                match terms.iter_mut().find(|(v, _)| *v == ins) {
                    Some((_, acc)) => *acc = acc.clone() + c,
                    None => terms.push((ins, c)),
                }
            }
        }
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let expansion: Vec<(T, Vec<u32>)> =
            terms.into_iter().filter(|(_, c)| !c.is_zero()).map(|(ins, c)| (c, ins)).collect();
        self.kmz.entry(b.clone()).or_insert_with(|| Arc::new(expansion)).clone()
    }

    fn kmz_value(&self, g: u32, kappa: &MultiIndex, psi: &[u32]) -> T {
        self.kmz_expansion(kappa)
            .iter()
            .fold(T::zero(), |acc, (c, extra)| acc + c.clone() * self.pure_value(g as i64, with_points(psi, extra)))
    }

    fn check_recursion_key(key: &CorrelatorKey, pos: usize) -> Result<()> {
        if key.psi.is_empty() {
            return Err(Error::InvalidArgument(format!("{key}: recursion needs at least one marked point")));
        }
        if pos >= key.psi.len() {
            return Err(Error::InvalidArgument(format!("{key}: no marked point at position {pos}")));
        }
        Ok(())
    }

    /// The alternating κ/ψ recursion solved for its `L = 0` term, peeling
    /// the largest ψ exponent.
    pub fn recurse_thm14(&self, key: &CorrelatorKey) -> Result<T> {
        self.recurse_thm14_at(key, 0)
    }

    /// As [`Engine::recurse_thm14`], with the ψ exponent at `pos` (in the
    /// canonical descending order) playing the role of `d_1`.
    pub fn recurse_thm14_at(&self, key: &CorrelatorKey, pos: usize) -> Result<T> {
        let key = CorrelatorKey::new(key.genus, key.kappa.clone(), key.psi.clone());
        Self::check_recursion_key(&key, pos)?;
        if let Some(v) = Self::trivial(&key)? {
            return Ok(v);
        }
        Ok(self.thm14_at(key.genus, &key.kappa, &key.psi, pos))
    }

    /// `Σ_{L+L'=b} (-1)^{||L||} binom(b,L) (2d_1+2|L|+1)!!/(2|L|-1)!! ⟨κ(L') τ_{d_1+|L|} Π_{j≥2} τ_{d_j}⟩_g
    ///  = Σ_{j≥2} (2d_1+2d_j+1)!!/(2d_j-1)!! ⟨κ(b) τ_{d_1+d_j} Π_{i≠1,j} τ_{d_i}⟩_g
    ///  + ½ Σ_{r+s=d_1-1} (2r+1)!!(2s+1)!! [⟨κ(b) τ_r τ_s Π_{i≥2} τ_{d_i}⟩_{g-1}
    ///  + Σ_{e+f=b, I⊔J} binom(b,e) ⟨κ(e) τ_r τ_I⟩_{g'} ⟨κ(f) τ_s τ_J⟩_{g-g'}]`.
    fn thm14_at(&self, g: u32, kappa: &MultiIndex, psi: &[u32], pos: usize) -> T {
        if g == 1 && psi == [0] {
            return T::ratio(1, 8);
        }
        let s = Strategy::Thm14;
        let gi = g as i64;
        let d1 = psi[pos];
        let rest = without(psi, pos);

        let mut rhs = T::zero();
        for (j, &dj) in rest.iter().enumerate() {
            let mut pts = without(&rest, j);
            pts.push(d1 + dj);
            let w = df_ratio::<T>(2 * (d1 + dj) as i64 + 1, 2 * dj as i64 - 1);
            rhs = rhs + w * self.eval(s, gi, kappa, &pts);
        }
        let half = T::ratio(1, 2);
        let kappa_splits = split_pairs(kappa);
        let rest_splits = point_splits(&rest);
        for r in 0..d1 {
            let sr = d1 - 1 - r;
            let w = T::from_bigint(&(dfact(2 * r as i64 + 1) * dfact(2 * sr as i64 + 1)));
            let mut inner = self.eval(s, gi - 1, kappa, &with_points(&rest, &[r, sr]));
            for (e, f) in &kappa_splits {
                let bin = T::from_bigint(&mi_binomial(kappa, e));
                for (i, j, mult) in &rest_splits {
                    let g1 = e.weight() + i.iter().sum::<u32>() + r + 1;
                    if g1 >= g {
                        continue;
                    }
                    let left = self.eval(s, g1 as i64, e, &with_points(i, &[r]));
                    let right = self.eval(s, (g - g1) as i64, f, &with_points(j, &[sr]));
                    inner = inner + bin.clone() * T::from_bigint(mult) * left * right;
                }
            }
            rhs = rhs + half.clone() * w * inner;
        }

        let mut moved = T::zero();
        for (l, lp) in &kappa_splits {
            if l.is_zero() {
                continue;
            }
            let wl = l.weight();
            let mut pts = rest.clone();
            pts.push(d1 + wl);
            let w = df_ratio::<T>(2 * (d1 + wl) as i64 + 1, 2 * wl as i64 - 1);
            let term = self.eval(s, gi, lp, &pts);
            moved = moved + sign::<T>(l.size()) * T::from_bigint(&mi_binomial(kappa, l)) * w * term;
        }
        (rhs - moved) / dfact_s::<T>(2 * d1 as i64 + 1)
    }

    /// The α-weighted recursion, peeling the largest ψ exponent.
    pub fn recurse_thm15(&self, key: &CorrelatorKey) -> Result<T> {
        self.recurse_thm15_at(key, 0)
    }

    pub fn recurse_thm15_at(&self, key: &CorrelatorKey, pos: usize) -> Result<T> {
        let key = CorrelatorKey::new(key.genus, key.kappa.clone(), key.psi.clone());
        Self::check_recursion_key(&key, pos)?;
        if let Some(v) = Self::trivial(&key)? {
            return Ok(v);
        }
        Ok(self.thm15_at(key.genus, &key.kappa, &key.psi, pos))
    }

    /// `(2d_1+1)!! ⟨κ(b) Π τ_{d_i}⟩_g
    ///  = Σ_{j≥2} Σ_{L+L'=b} α_L binom(b,L) (2|L|+2d_1+2d_j+1)!!/(2d_j-1)!! ⟨κ(L') τ_{|L|+d_1+d_j} Π_{i≠1,j} τ_{d_i}⟩_g
    ///  + ½ Σ_{L+L'=b} Σ_{r+s=|L|+d_1-1} α_L binom(b,L) (2r+1)!!(2s+1)!! ⟨κ(L') τ_r τ_s Π_{i≥2} τ_{d_i}⟩_{g-1}
    ///  + ½ Σ_{L+e+f=b} Σ_{r+s=|L|+d_1-1, I⊔J} α_L binom(b; L,e,f) (2r+1)!!(2s+1)!! ⟨κ(e) τ_r τ_I⟩_{g'} ⟨κ(f) τ_s τ_J⟩_{g-g'}`.
    fn thm15_at(&self, g: u32, kappa: &MultiIndex, psi: &[u32], pos: usize) -> T {
        if g == 1 && psi == [0] {
            return T::ratio(1, 8);
        }
        let s = Strategy::Thm15;
        let gi = g as i64;
        let d1 = psi[pos];
        let rest = without(psi, pos);
        let rest_splits = point_splits(&rest);
        let half = T::ratio(1, 2);

        let mut acc = T::zero();
        for (l, lp) in split_pairs(kappa) {
            let alpha = self.coeffs.alpha(&l);
            let a = alpha.clone() * T::from_bigint(&mi_binomial(kappa, &l));
            let wl = l.weight();
            for (j, &dj) in rest.iter().enumerate() {
                let mut pts = without(&rest, j);
                pts.push(wl + d1 + dj);
                let w = df_ratio::<T>(2 * (wl + d1 + dj) as i64 + 1, 2 * dj as i64 - 1);
                acc = acc + a.clone() * w * self.eval(s, gi, &lp, &pts);
            }
            let top = wl + d1;
            for r in 0..top {
                let sr = top - 1 - r;
                let w = T::from_bigint(&(dfact(2 * r as i64 + 1) * dfact(2 * sr as i64 + 1)));
                let nonsep = self.eval(s, gi - 1, &lp, &with_points(&rest, &[r, sr]));
                acc = acc + half.clone() * a.clone() * w.clone() * nonsep;
                for (e, f) in split_pairs(&lp) {
                    let m = alpha.clone() * T::from_bigint(&mi_multinomial(kappa, &[l.clone(), e.clone(), f.clone()]));
                    for (i, j, mult) in &rest_splits {
                        let g1 = e.weight() + i.iter().sum::<u32>() + r + 1;
                        if g1 >= g {
                            continue;
                        }
                        let left = self.eval(s, g1 as i64, &e, &with_points(i, &[r]));
                        let right = self.eval(s, (g - g1) as i64, &f, &with_points(j, &[sr]));
                        acc = acc + half.clone() * m.clone() * w.clone() * T::from_bigint(mult) * left * right;
                    }
                }
            }
        }
        acc / dfact_s::<T>(2 * d1 as i64 + 1)
    }
}
