use dashmap::DashMap;

use crate::combinatorics::{beta_coefficients, dfact, dfact_s, factorial};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The κ_1-only recursion with β coefficients,
///
/// `(2d_1+1)!! ⟨κ_1^a Π τ_{d_i}⟩_g
///  = Σ_{j≥2} Σ_b a!/(a-b)! (2b+2d_1+2d_j+1)!!/(2d_j-1)!! β_b ⟨κ_1^{a-b} τ_{b+d_1+d_j} Π_{i≠1,j} τ_{d_i}⟩_g
///  + ½ Σ_b Σ_{r+s=b+d_1-1} a!/(a-b)! (2r+1)!!(2s+1)!! β_b ⟨κ_1^{a-b} τ_r τ_s Π_{i≥2} τ_{d_i}⟩_{g-1}
///  + ½ Σ_b Σ_{c+c'=a-b, r+s=b+d_1-1} Σ_{g_1+g_2=g, I⊔J} a!/(c!c'!) (2r+1)!!(2s+1)!! β_b
///    ⟨κ_1^c τ_r τ_I⟩_{g_1} ⟨κ_1^{c'} τ_s τ_J⟩_{g_2}`,
///
/// evaluated with its own memo table, independent of the main engine.
pub struct KappaOneRecursion<T> {
    beta: Vec<T>,
    memo: DashMap<(u32, u32, Vec<u32>), T>,
}

impl<T: Scalar> KappaOneRecursion<T> {
    pub fn new(max_genus: u32) -> Self {
        Self { beta: beta_coefficients(max_genus as usize + 1), memo: DashMap::new() }
    }

    /// `⟨κ_1^a Π τ_{d_i}⟩_g`; needs at least one marked point.
    pub fn value(&self, g: u32, a: u32, psi: &[u32]) -> Result<T> {
        if psi.is_empty() {
            return Err(Error::InvalidArgument("the κ_1 recursion needs at least one marked point".into()));
        }
        if g as usize > self.beta.len() {
            return Err(Error::InvalidArgument(format!("genus {g} beyond the prepared β table")));
        }
        Ok(self.eval(g as i64, a, psi.to_vec()))
    }

    fn eval(&self, g: i64, a: u32, mut psi: Vec<u32>) -> T {
        if g <= 0 || a + psi.iter().sum::<u32>() != (g - 1) as u32 {
            return T::zero();
        }
        let g = g as u32;
        if g == 1 && psi == [0] {
            return T::ratio(1, 8);
        }
        psi.sort_unstable_by(|x, y| y.cmp(x));
        let key = (g, a, psi);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let psi = &key.2;
        let d1 = psi[0];
        let rest = &psi[1..];
        let fa = T::from_bigint(&factorial(a));
        let half = T::ratio(1, 2);
        let mut acc = T::zero();
        for b in 0..=a {
            let beta = self.beta[b as usize].clone();
            let falling = fa.clone() / T::from_bigint(&factorial(a - b));
            for (j, &dj) in rest.iter().enumerate() {
                let mut pts: Vec<u32> = rest.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).collect();
                pts.push(b + d1 + dj);
                let w = dfact_s::<T>(2 * (b + d1 + dj) as i64 + 1) / dfact_s::<T>(2 * dj as i64 - 1);
                acc = acc + falling.clone() * w * beta.clone() * self.eval(g as i64, a - b, pts);
            }
            let top = b + d1;
            for r in 0..top {
                let s = top - 1 - r;
                let w = T::from_bigint(&(dfact(2 * r as i64 + 1) * dfact(2 * s as i64 + 1)));
                let mut pts = rest.to_vec();
                pts.extend([r, s]);
                let nonsep = self.eval(g as i64 - 1, a - b, pts);
                acc = acc + half.clone() * falling.clone() * w.clone() * beta.clone() * nonsep;
                let k = rest.len();
                for mask in 0u32..(1 << k) {
                    let mut left: Vec<u32> = vec![r];
                    let mut right: Vec<u32> = vec![s];
                    for (i, &x) in rest.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            left.push(x);
                        } else {
                            right.push(x);
                        }
                    }
                    for c in 0..=(a - b) {
                        let cp = a - b - c;
                        let g1 = c + left.iter().sum::<u32>() + 1;
                        if g1 >= g {
                            continue;
                        }
                        let m = fa.clone() / T::from_bigint(&(factorial(c) * factorial(cp)));
                        let l = self.eval(g1 as i64, c, left.clone());
                        let rv = self.eval((g - g1) as i64, cp, right.clone());
                        acc = acc + half.clone() * m * w.clone() * beta.clone() * l * rv;
                    }
                }
            }
        }
        let v = acc / dfact_s::<T>(2 * d1 as i64 + 1);
        self.memo.entry(key).or_insert(v).clone()
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::MultiIndex;
    use crate::correlator::{CorrelatorKey, Engine};
    use crate::Rational;

    #[test]
    fn matches_engine() {
        let rec = KappaOneRecursion::<Rational>::new(5);
        assert_eq!(rec.value(2, 1, &[0]).unwrap(), Rational::ratio(9, 128));
        let e = Engine::<Rational>::new();
        for g in 1..=4u32 {
            for a in 0..g {
                for psi in [vec![g - 1 - a], vec![g - 1 - a, 0], vec![0, g - 1 - a, 0]] {
                    let key = CorrelatorKey::new(g, MultiIndex::first(a), psi.clone());
                    assert_eq!(rec.value(g, a, &psi).unwrap(), e.recurse_thm15(&key).unwrap(), "{key}");
                }
            }
        }
    }

    #[test]
    fn rejects_no_points() {
        assert!(KappaOneRecursion::<Rational>::new(3).value(2, 1, &[]).is_err());
    }
}
