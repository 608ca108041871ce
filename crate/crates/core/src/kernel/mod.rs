//! Kernel calculus for the Stanford-Witten volume recursion.
//!
//! With `H(x,y) = ½(sech(π(x-y)/2) - sech(π(x+y)/2))` the moments
//! `M_{2k+1}(t) = ∫_0^∞ x^{2k+1} H(t,x) dx` are odd polynomials,
//! `M_{2k+1} = (2k+1)! h_{2k+1}`, so the whole recursion can be assembled
//! from exact coefficients.

mod kappa_one;
mod quadrature;

use std::collections::BTreeMap;
use std::fmt;

pub use kappa_one::KappaOneRecursion;
pub use quadrature::{quadrature_oracle, QuadratureKind};

use crate::combinatorics::{binomial, fact_s, secant_numbers};
use crate::correlator::Engine;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::volumes::{normalized_volume, VolumeMonomial, VolumePolynomial};

/// `h_{2k+1}(t) = Σ_{i=0}^k a_{k-i}/(2k-2i)! · t^{2i+1}/(2i+1)!`, stored as
/// the coefficients of `t^{2i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolynomial<T> {
    order: u32,
    coeffs: Vec<T>,
}

impl<T: Scalar> HPolynomial<T> {
    pub fn new(k: u32) -> Self {
        let a = secant_numbers::<T>(k as usize);
        let coeffs = (0..=k)
            .map(|i| a[(k - i) as usize].clone() / (fact_s::<T>(2 * (k - i)) * fact_s::<T>(2 * i + 1)))
            .collect();
        Self { order: k, coeffs }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficient of `t^{2i+1}`.
    pub fn coefficient(&self, i: u32) -> T {
        self.coeffs.get(i as usize).cloned().unwrap_or_else(T::zero)
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn evaluate(&self, t: &T) -> T {
        let t2 = t.clone() * t.clone();
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t2.clone() + c.clone();
        }
        acc * t.clone()
    }
}

impl fmt::Display for HPolynomial<crate::Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if num_traits::Zero::is_zero(c) {
                continue;
            }
            let e = 2 * i + 1;
            let var = if e == 1 { "t".to_string() } else { format!("t^{e}") };
            if num_traits::One::is_one(c) {
                parts.push(var);
            } else {
                parts.push(format!("{}*{var}", crate::scalar::render_rational(c)));
            }
        }
        f.write_str(&parts.join(" + "))
    }
}

/// `h_{2k+1}` for order `k`.
pub fn h_polynomial<T: Scalar>(k: u32) -> HPolynomial<T> {
    HPolynomial::new(k)
}

/// Coefficients of `M_{2k+1}(t) = (2k+1)! h_{2k+1}(t)`; entry `i` multiplies
/// `t^{2i+1}`.
pub fn moment_coefficients<T: Scalar>(k: u32) -> Vec<T> {
    let scale = fact_s::<T>(2 * k + 1);
    HPolynomial::<T>::new(k).coeffs.into_iter().map(|c| c * scale.clone()).collect()
}

/// `(c, m)` with `∫∫ x^{2a+1} y^{2b+1} H(t,x+y) dx dy = c · M_{2m+1}(t)`:
/// `c = (2a+1)!(2b+1)!/(2a+2b+3)!` and `m = a+b+1`.
pub fn beta_moment_constant<T: Scalar>(a: u32, b: u32) -> (T, u32) {
    let c = fact_s::<T>(2 * a + 1) * fact_s::<T>(2 * b + 1) / fact_s::<T>(2 * a + 2 * b + 3);
    (c, a + b + 1)
}

/// `∫_0^∞ x^{2a+1} R(L_1,L_j,x) dx = ½(M_{2a+1}(L_1+L_j) + M_{2a+1}(L_1-L_j))`
/// as a map from exponents `(e_1, e_j)` of `L_1^{e_1} L_j^{e_j}` to
/// coefficients. Only odd `e_1` and even `e_j` occur.
pub fn r_moment<T: Scalar>(a: u32) -> BTreeMap<(u32, u32), T> {
    let mut out = BTreeMap::new();
    for (i, c) in moment_coefficients::<T>(a).into_iter().enumerate() {
        let i = i as u32;
        // ½((L_1+L_j)^{2i+1} + (L_1-L_j)^{2i+1}) = Σ_m binom(2i+1,2m+1) L_1^{2m+1} L_j^{2(i-m)}
        for m in 0..=i {
            let coeff = c.clone() * T::from_bigint(&binomial(2 * i + 1, 2 * m + 1));
            let slot = out.entry((2 * m + 1, 2 * (i - m))).or_insert_with(T::zero);
            *slot = slot.clone() + coeff;
        }
    }
    out.retain(|_, v: &mut T| !v.is_zero());
    out
}

/// The two parts of the recursion's right-hand side for `L_1 v_{g,n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwTerms<T> {
    /// `∫∫ xy D(L_1,x,y) P_{g,n+1}(x,y,L_K) dx dy`, before the constant `c_D`.
    pub d_term: VolumePolynomial<T>,
    /// `Σ_j ∫ x R(L_1,L_j,x) v_{g,n-1}(x, L_{K∖j}) dx`.
    pub r_term: VolumePolynomial<T>,
}

fn check_sw(g: u32, n: usize) -> Result<()> {
    if g == 0 || n == 0 || (g, n) == (1, 1) {
        return Err(Error::InvalidArgument(format!(
            "the kernel recursion needs g ≥ 1, n ≥ 1, (g,n) ≠ (1,1); got ({g},{n})"
        )));
    }
    Ok(())
}

fn volume_or_zero<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<Option<VolumePolynomial<T>>> {
    if g == 0 {
        return Ok(None);
    }
    normalized_volume(engine, g, n).map(Some)
}

/// Adds `coeff · L_1 · (2p+1)!(2q+1)! h_{2p+2q+3}(L_1) · Π L_K^{rest}` to `out`.
fn add_d_contribution<T: Scalar>(out: &mut VolumePolynomial<T>, p: u32, q: u32, rest: &[u32], coeff: &T) {
    let (c, m) = beta_moment_constant::<T>(p, q);
    for (i, mc) in moment_coefficients::<T>(m).into_iter().enumerate() {
        let mut lengths = vec![2 * i as u32 + 1];
        lengths.extend_from_slice(rest);
        out.add_term(VolumeMonomial::new(0, lengths), coeff.clone() * c.clone() * mc);
    }
}

/// Both parts of the recursion's right-hand side, assembled from exact
/// kernel moments.
pub fn sw_terms<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<SwTerms<T>> {
    check_sw(g, n)?;
    let k = n - 1;
    let mut d_term = VolumePolynomial::zero(n);
    if let Some(v) = volume_or_zero(engine, g - 1, n + 1)? {
        for (m, c) in v.terms() {
            add_d_contribution(&mut d_term, m.lengths[0] / 2, m.lengths[1] / 2, &m.lengths[2..], c);
        }
    }
    for mask in 0u32..(1 << k) {
        let i_set: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let j_set: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 0).collect();
        for g1 in 1..g {
            let g2 = g - g1;
            let (Some(left), Some(right)) =
                (volume_or_zero(engine, g1, i_set.len() + 1)?, volume_or_zero(engine, g2, j_set.len() + 1)?)
            else {
                continue;
            };
            for (ml, cl) in left.terms() {
                for (mr, cr) in right.terms() {
                    let mut rest = vec![0; k];
                    for (pos, &idx) in i_set.iter().enumerate() {
                        rest[idx] = ml.lengths[pos + 1];
                    }
                    for (pos, &idx) in j_set.iter().enumerate() {
                        rest[idx] = mr.lengths[pos + 1];
                    }
                    let c = cl.clone() * cr.clone();
                    add_d_contribution(&mut d_term, ml.lengths[0] / 2, mr.lengths[0] / 2, &rest, &c);
                }
            }
        }
    }

    let mut r_term = VolumePolynomial::zero(n);
    if n >= 2 {
        let lower = normalized_volume(engine, g, n - 1)?;
        for j in 0..k {
            let others: Vec<usize> = (0..k).filter(|&i| i != j).collect();
            for (m, c) in lower.terms() {
                let rm = r_moment::<T>(m.lengths[0] / 2);
                for (&(e1, ej), rc) in &rm {
                    let mut lengths = vec![0; n];
                    lengths[0] = e1;
                    lengths[j + 1] = ej;
                    for (pos, &idx) in others.iter().enumerate() {
                        lengths[idx + 1] = m.lengths[pos + 1];
                    }
                    r_term.add_term(VolumeMonomial::new(0, lengths), c.clone() * rc.clone());
                }
            }
        }
    }
    Ok(SwTerms { d_term, r_term })
}

/// Right-hand side of the recursion for `L_1 v_{g,n}(L_1, L_K)` with the
/// D-term scaled by `c_d`.
pub fn sw_rhs<T: Scalar>(engine: &Engine<T>, g: u32, n: usize, c_d: &T) -> Result<VolumePolynomial<T>> {
    let terms = sw_terms(engine, g, n)?;
    let mut out = terms.r_term;
    for (m, c) in terms.d_term.terms() {
        out.add_term(m.clone(), c.clone() * c_d.clone());
    }
    Ok(out)
}

/// `L_1 v_{g,n}`.
pub fn sw_lhs<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<VolumePolynomial<T>> {
    Ok(normalized_volume(engine, g, n)?.mul_length(0, 1))
}

/// The D-term constant that makes the `(2,1)` recursion hold, provided the
/// discrepancy is an exact multiple of the unscaled D-term.
pub fn calibrate_c_d<T: Scalar>(engine: &Engine<T>) -> Result<T> {
    let terms = sw_terms(engine, 2, 1)?;
    let target = sw_lhs(engine, 2, 1)?.sub(&terms.r_term)?;
    let mut ratio: Option<T> = None;
    for (m, c) in terms.d_term.terms() {
        let r = target.coefficient(m) / c.clone();
        match &ratio {
            None => ratio = Some(r),
            Some(existing) if existing.agrees(&r) => {}
            Some(existing) => {
                return Err(Error::Inconsistent {
                    key: "c_D at (2,1)".into(),
                    first: existing.render(),
                    second: r.render(),
                })
            }
        }
    }
    let c = ratio.ok_or_else(|| Error::InvalidArgument("D-term vanishes at (2,1)".into()))?;
    if !target.sub(&terms.d_term.scale(&c))?.is_zero() {
        return Err(Error::Inconsistent {
            key: "c_D at (2,1)".into(),
            first: "D-term support".into(),
            second: "target support".into(),
        });
    }
    Ok(c)
}

/// `L_1 v_{g,n} − sw_rhs(g, n, c_d)`.
pub fn sw_difference<T: Scalar>(engine: &Engine<T>, g: u32, n: usize, c_d: &T) -> Result<VolumePolynomial<T>> {
    sw_lhs(engine, g, n)?.sub(&sw_rhs(engine, g, n, c_d)?)
}

/// [`sw_difference`] with the calibrated constant.
pub fn sw_verify<T: Scalar>(engine: &Engine<T>, g: u32, n: usize) -> Result<VolumePolynomial<T>> {
    let c = calibrate_c_d(engine)?;
    sw_difference(engine, g, n, &c)
}
