//! Closed formulas for a few families of pure-ψ correlators.

use crate::combinatorics::{binomial, dfact_s, fact_s};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `⟨τ_0^n⟩_1 = (n-1)!/8`.
pub fn closed_genus1<T: Scalar>(n: u32) -> Result<T> {
    if n == 0 {
        return Err(Error::Undefined("genus one with no marked points".into()));
    }
    Ok(fact_s::<T>(n - 1) / T::from_i64(8))
}

/// `⟨τ_{g-1}⟩_g = (2g-1)!!^2 / (8^g g! (2g-1))`.
pub fn closed_one_point<T: Scalar>(g: u32) -> Result<T> {
    if g == 0 {
        return Err(Error::InvalidArgument("one-point formula needs g >= 1".into()));
    }
    let df = dfact_s::<T>(2 * g as i64 - 1);
    Ok(df.clone() * df / (T::from_i64(8).pow_u32(g) * fact_s::<T>(g) * T::from_i64(2 * g as i64 - 1)))
}

/// `⟨τ_k τ_{g-1-k}⟩_g` for `2k ≤ g-1`:
/// `(2g-1)!!^2/(8^g g!) · (2g-1)!!/((2k+1)!!(2g-1-2k)!!) · Σ_{i≤k} (g-2i)/g · C(g,i)^4 / C(2g,2i)^3`.
pub fn closed_two_point<T: Scalar>(g: u32, k: u32) -> Result<T> {
    if g == 0 || 2 * k > g - 1 {
        return Err(Error::InvalidArgument(format!("two-point formula needs 2k <= g-1, got g={g}, k={k}")));
    }
    let df = dfact_s::<T>(2 * g as i64 - 1);
    let prefactor = df.clone() * df.clone() / (T::from_i64(8).pow_u32(g) * fact_s::<T>(g));
    let ratio = df / (dfact_s::<T>(2 * k as i64 + 1) * dfact_s::<T>(2 * g as i64 - 1 - 2 * k as i64));
    let mut sum = T::zero();
    for i in 0..=k {
        let c = T::from_bigint(&binomial(g, i)).pow_u32(4);
        let d = T::from_bigint(&binomial(2 * g, 2 * i)).pow_u32(3);
        sum = sum + T::from_i64(g as i64 - 2 * i as i64) / T::from_i64(g as i64) * c / d;
    }
    Ok(prefactor * ratio * sum)
}
