use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// A finitely supported sequence `m = (m(1), m(2), ...)` of nonnegative
/// integers, stored densely without trailing zeros.
///
/// `counts[i]` holds `m(i + 1)`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `δ_a`: a single 1 at position `a` (1-based).
    pub fn delta(a: usize) -> Self {
        assert!(a >= 1, "multi-index positions start at 1");
        Self::from_counts(&{
            let mut v = vec![0; a];
            v[a - 1] = 1;
            v
        })
    }

    /// `(l, 0, 0, ...)`, the index of `κ_1^l`.
    pub fn first(l: u32) -> Self {
        Self::from_counts(&[l])
    }

    pub fn from_counts(counts: &[u32]) -> Self {
        let mut counts = counts.to_vec();
        while counts.last() == Some(&0) {
            counts.pop();
        }
        Self { counts }
    }

    /// Builds from `(index, count)` pairs; repeated indices accumulate.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut counts = Vec::new();
        for (index, count) in pairs {
            assert!(index >= 1, "multi-index positions start at 1");
            if counts.len() < index {
                counts.resize(index, 0);
            }
            counts[index - 1] += count;
        }
        Self::from_counts(&counts)
    }

    /// `m(i)` for a 1-based position.
    pub fn get(&self, index: usize) -> u32 {
        if index == 0 {
            return 0;
        }
        self.counts.get(index - 1).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Largest position with a nonzero count, 0 for the zero index.
    pub fn max_index(&self) -> usize {
        self.counts.len()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.is_empty()
    }

    /// Nonzero `(index, count)` pairs in increasing index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i + 1, c))
    }

    /// `|m| = Σ i·m(i)`.
    pub fn weight(&self) -> u32 {
        self.pairs().map(|(i, c)| i as u32 * c).sum()
    }

    /// `||m|| = Σ m(i)`.
    pub fn size(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `m! = Π m(i)!`.
    pub fn factorial(&self) -> BigInt {
        self.counts.iter().map(|&c| factorial(c)).product()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.counts.len().max(other.counts.len());
        let counts: Vec<u32> = (1..=n).map(|i| self.get(i) + other.get(i)).collect();
        Self::from_counts(&counts)
    }

    /// Componentwise difference, `None` unless `other ≤ self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if !other.le(self) {
            return None;
        }
        let counts: Vec<u32> = (1..=self.counts.len()).map(|i| self.get(i) - other.get(i)).collect();
        Some(Self::from_counts(&counts))
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &Self) -> bool {
        self.counts.len() <= other.counts.len() && self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    /// All `L ≤ self` in lexicographic order of their count vectors.
    pub fn sub_indices(&self) -> Vec<Self> {
        let mut out = vec![Vec::new()];
        for &c in &self.counts {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for prefix in &out {
                for k in 0..=c {
                    let mut v: Vec<u32> = prefix.clone();
                    v.push(k);
                    next.push(v);
                }
            }
            out = next;
        }
        out.iter().map(|v| Self::from_counts(v)).collect()
    }

    /// `index:count` pairs, e.g. `1:2,3:1` for `κ_1^2 κ_3`.
    pub fn render_pairs(&self) -> String {
        self.pairs().map(|(i, c)| format!("{i}:{c}")).collect::<Vec<_>>().join(",")
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    /// Lexicographic on `(m(1), m(2), ...)`.
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.counts.len().max(other.counts.len());
        for i in 1..=n {
            match self.get(i).cmp(&other.get(i)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.counts)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_pairs())
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `binom(b, t) = Π binom(b(i), t(i))`; zero if some `t(i) > b(i)`.
pub fn mi_binomial(b: &MultiIndex, t: &MultiIndex) -> BigInt {
    let n = b.max_index().max(t.max_index());
    (1..=n).map(|i| binomial(b.get(i), t.get(i))).product()
}

/// `binom(b; a_1, ..., a_k) = Π_i multinomial(b(i); a_1(i), ..., a_k(i))`;
/// zero unless the parts sum to `b`.
pub fn mi_multinomial(b: &MultiIndex, parts: &[MultiIndex]) -> BigInt {
    let total = parts.iter().fold(MultiIndex::zero(), |acc, p| acc.add(p));
    if &total != b {
        return BigInt::zero();
    }
    let denom: BigInt = parts.iter().map(MultiIndex::factorial).product();
    let (q, r) = b.factorial().div_rem(&denom);
    debug_assert!(r.is_zero());
    q
}

/// All ordered `k`-tuples of multi-indices summing to `b`, in lexicographic
/// order. With `nonzero` set, every part must be nonzero.
pub fn splits(b: &MultiIndex, k: usize, nonzero: bool) -> Vec<Vec<MultiIndex>> {
    assert!(k >= 1, "splits needs at least one part");
    if k == 1 {
        if nonzero && b.is_zero() {
            return Vec::new();
        }
        return vec![vec![b.clone()]];
    }
    let mut out = Vec::new();
    for head in b.sub_indices() {
        if nonzero && head.is_zero() {
            continue;
        }
        let rest = b.checked_sub(&head).expect("sub-index");
        for mut tail in splits(&rest, k - 1, nonzero) {
            let mut tuple = Vec::with_capacity(k);
            tuple.push(head.clone());
            tuple.append(&mut tail);
            out.push(tuple);
        }
    }
    out
}

/// Pairs `(L, L')` with `L + L' = b`, ordered by `L`.
pub fn split_pairs(b: &MultiIndex) -> Vec<(MultiIndex, MultiIndex)> {
    b.sub_indices()
        .into_iter()
        .map(|l| {
            let rest = b.checked_sub(&l).expect("sub-index");
            (l, rest)
        })
        .collect()
}

/// All multi-indices of weight exactly `w`.
pub fn indices_of_weight(w: u32) -> Vec<MultiIndex> {
    fn rec(pos: u32, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if remaining == 0 {
            out.push(MultiIndex::from_counts(cur));
            return;
        }
        if pos > remaining {
            return;
        }
        for c in 0..=remaining / pos {
            cur.push(c);
            rec(pos + 1, remaining - c * pos, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, w, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All multi-indices with `||m|| = k` and `|m| ≤ max_weight`.
pub fn indices_of_size(k: u32, max_weight: u32) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = (0..=max_weight).flat_map(indices_of_weight).filter(|m| m.size() == k).collect();
    out.sort();
    out
}
