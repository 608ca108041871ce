//! Residuals `LHS − RHS` of the dilaton and KdV identities and their
//! κ-class generalizations. Every residual is expected to vanish.

use super::{point_splits, sign, with_points, CorrelatorKey, Engine};
use crate::combinatorics::{mi_binomial, split_pairs, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IdentityKind {
    /// `⟨τ_0 Π τ_{d_i}⟩_g = (2g-2+n) ⟨Π τ_{d_i}⟩_g`.
    Dilaton,
    /// `⟨τ_0 τ_1 Π τ_{d_i}⟩_g = ½ Σ ⟨τ_0² τ_I⟩_{g'} ⟨τ_0² τ_J⟩_{g-g'} + 1/12 ⟨τ_0⁴ Π τ_{d_i}⟩_{g-1}`.
    Kdv,
    /// The KdV identity with `κ(b)` distributed as `binom(b,e) κ(e) ⊗ κ(f)`.
    KdvKappa,
    /// `Σ_{L+L'=b} (-1)^{||L||} binom(b,L) ⟨τ_{|L|} Π τ_{d_i} κ(L')⟩_g = (2g-2+n) ⟨Π τ_{d_i} κ(b)⟩_g`.
    DilatonKappa,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 4] =
        [IdentityKind::Dilaton, IdentityKind::Kdv, IdentityKind::KdvKappa, IdentityKind::DilatonKappa];

    pub fn name(self) -> &'static str {
        match self {
            IdentityKind::Dilaton => "dilaton",
            IdentityKind::Kdv => "kdv",
            IdentityKind::KdvKappa => "kdv_kappa",
            IdentityKind::DilatonKappa => "dilaton_kappa",
        }
    }
}

impl<T: Scalar> Engine<T> {
    fn at(&self, g: i64, kappa: &MultiIndex, psi: Vec<u32>) -> Result<T> {
        if g <= 0 {
            return Ok(T::zero());
        }
        self.value(&CorrelatorKey::new(g as u32, kappa.clone(), psi))
    }

    /// `LHS − RHS` of `kind` instantiated at `key`; the ψ exponents of `key`
    /// are the `d_i` and its κ multi-index is `b`.
    pub fn identity_residual(&self, kind: IdentityKind, key: &CorrelatorKey) -> Result<T> {
        let g = key.genus as i64;
        let n = key.psi.len() as i64;
        let b = &key.kappa;
        let d = &key.psi;
        if matches!(kind, IdentityKind::Dilaton | IdentityKind::Kdv) && !b.is_zero() {
            return Err(Error::InvalidArgument(format!("{} takes no κ classes, got {key}", kind.name())));
        }
        match kind {
            IdentityKind::Dilaton | IdentityKind::DilatonKappa => {
                let rhs = T::from_i64(2 * g - 2 + n) * self.at(g, b, d.clone())?;
                let mut lhs = T::zero();
                for (l, lp) in split_pairs(b) {
                    let term = self.at(g, &lp, with_points(d, &[l.weight()]))?;
                    lhs = lhs + sign::<T>(l.size()) * T::from_bigint(&mi_binomial(b, &l)) * term;
                }
                Ok(lhs - rhs)
            }
            IdentityKind::Kdv | IdentityKind::KdvKappa => {
                let lhs = self.at(g, b, with_points(d, &[0, 1]))?;
                let mut split = T::zero();
                for (e, f) in split_pairs(b) {
                    let bin = T::from_bigint(&mi_binomial(b, &e));
                    for (i, j, mult) in point_splits(d) {
                        let g1 = (e.weight() + i.iter().sum::<u32>() + 1) as i64;
                        if g1 >= g {
                            continue;
                        }
                        let left = self.at(g1, &e, with_points(&i, &[0, 0]))?;
                        let right = self.at(g - g1, &f, with_points(&j, &[0, 0]))?;
                        split = split + bin.clone() * T::from_bigint(&mult) * left * right;
                    }
                }
                let loop_term = self.at(g - 1, b, with_points(d, &[0, 0, 0, 0]))?;
                Ok(lhs - T::ratio(1, 2) * split - T::ratio(1, 12) * loop_term)
            }
        }
    }
}
