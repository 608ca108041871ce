//! Generating functions of the correlators, their Virasoro operators and
//! the KdV and shift identities, all on truncated series.
//!
//! `F = Σ ħ^{g-1} ⟨κ(m) Π τ_{d_i}⟩_g t^e s^m / (e! m!)` is the free energy
//! and `G = exp F`. Setting `s = 0` gives `log Z`.

mod operator;
mod series;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use operator::{
    commutator_residual, virasoro, virasoro_hat, virasoro_v, virasoro_v_from_hat, DifferentialOperator, OperatorFamily,
    OperatorTerm,
};
pub use series::{Monomial, SeriesCutoff, TruncatedSeries};

use crate::combinatorics::{indices_of_weight, p_polynomial, MultiIndex, ShiftMode};
use crate::correlator::{CorrelatorKey, Engine};
use crate::error::Result;
use crate::scalar::Scalar;

/// All `(g, m, e)` whose monomial `ħ^{g-1} t^e s^m` lies in `cutoff` and can
/// carry a nonzero coefficient.
fn free_energy_keys(cutoff: &SeriesCutoff, with_kappa: bool) -> Vec<(u32, MultiIndex, Vec<u32>)> {
    let mut keys = Vec::new();
    for g in 1..=cutoff.max_genus {
        let s_max = if with_kappa { cutoff.max_s_weight.min(g - 1) } else { 0 };
        for sw in 0..=s_max {
            for m in indices_of_weight(sw) {
                // ψ exponents ≥ 1 form a partition of the remaining degree;
                // any number of τ_0 insertions can be added.
                for parts in indices_of_weight(g - 1 - sw) {
                    if parts.max_index() as u32 > cutoff.max_t_index || parts.size() > cutoff.max_points {
                        continue;
                    }
                    for zeros in 0..=cutoff.max_points - parts.size() {
                        if g == 1 && zeros == 0 && m.is_zero() {
                            continue;
                        }
                        let mut e = vec![zeros];
                        e.extend_from_slice(parts.counts());
                        keys.push((g, m.clone(), e));
                    }
                }
            }
        }
    }
    keys
}

/// The free energy `log G` within `cutoff`; without κ classes this is
/// `log Z`.
pub fn build_free_energy<T: Scalar>(
    engine: &Engine<T>,
    cutoff: &SeriesCutoff,
    with_kappa: bool,
) -> Result<TruncatedSeries<T>> {
    let keys = free_energy_keys(cutoff, with_kappa);
    let values: Vec<(Monomial, T)> = keys
        .into_par_iter()
        .map(|(g, m, e)| {
            let psi: Vec<u32> =
                e.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i as u32, c as usize)).collect();
            let value = engine.value(&CorrelatorKey::new(g, m.clone(), psi))?;
            let mono = Monomial::new(g - 1, e, m);
            let value = value / T::from_bigint(&mono.symmetry_factor());
            Ok((mono, value))
        })
        .collect::<Result<_>>()?;
    let mut f = TruncatedSeries::zero(*cutoff);
    for (m, v) in values {
        f.add_term(m, v);
    }
    Ok(f)
}

/// `G = exp F` within `cutoff`.
pub fn build_tau_function<T: Scalar>(
    engine: &Engine<T>,
    cutoff: &SeriesCutoff,
    with_kappa: bool,
) -> Result<TruncatedSeries<T>> {
    build_free_energy(engine, cutoff, with_kappa)?.exponentiate()
}

/// Coefficients of `op(series)` at every output monomial whose value is
/// fully determined by the series' cutoff, zeros included.
pub fn annihilation_residual<T: Scalar>(
    op: &DifferentialOperator<T>,
    series: &TruncatedSeries<T>,
) -> BTreeMap<Monomial, T> {
    let cutoff = series.cutoff();
    let mut out = op.apply(series);
    out.retain(|m, _| op.is_reliable(m, &cutoff));
    out
}

/// Input cutoff large enough that every monomial of `window` is reliable for
/// an operator of index `k` built with the same bounds.
pub fn operator_input_cutoff(window: &SeriesCutoff, k: u32) -> SeriesCutoff {
    SeriesCutoff::new(
        window.max_genus,
        window.max_points + 2,
        window.max_t_index + window.max_s_weight + k,
        window.max_s_weight,
    )
}

/// `A_k(G)` on the monomials of `window`, where `A_k` is `V̂_k` or `V_k`.
pub fn virasoro_residual<T: Scalar>(
    engine: &Engine<T>,
    family: OperatorFamily,
    k: u32,
    window: &SeriesCutoff,
) -> Result<BTreeMap<Monomial, T>> {
    let input = operator_input_cutoff(window, k);
    let g = build_tau_function(engine, &input, true)?;
    let op = virasoro(engine.coefficients(), family, k, &input);
    let mut residual = annihilation_residual(&op, &g);
    residual.retain(|m, _| window.contains(m));
    Ok(residual)
}

/// `F_{01} − ħ/12 F_{0000} − ħ/2 (F_{00})²` on the monomials of `series`
/// with at most `max_points − 4` t-factors, where all three terms are exact.
pub fn kdv_pde_residual_of<T: Scalar>(series: &TruncatedSeries<T>) -> BTreeMap<Monomial, T> {
    let cutoff = series.cutoff();
    let f00 = series.derivative(0).derivative(0);
    let lhs = series.derivative(0).derivative(1);
    let quartic = f00.derivative(0).derivative(0);
    let hbar = Monomial::new(1, Vec::new(), MultiIndex::zero());
    let rhs = quartic.mul_monomial(&hbar, &T::ratio(1, 12)).add(&f00.mul(&f00).mul_monomial(&hbar, &T::ratio(1, 2)));
    let diff = lhs.sub(&rhs);
    let window = SeriesCutoff::new(
        cutoff.max_genus,
        cutoff.max_points.saturating_sub(4),
        cutoff.max_t_index,
        cutoff.max_s_weight,
    );
    window_coefficients(&diff, &window, [&lhs, &rhs])
}

/// The KdV residual of the free energy on `window`.
pub fn kdv_pde_residual<T: Scalar>(engine: &Engine<T>, window: &SeriesCutoff) -> Result<BTreeMap<Monomial, T>> {
    let input =
        SeriesCutoff::new(window.max_genus, window.max_points + 4, window.max_t_index.max(1), window.max_s_weight);
    let f = build_free_energy(engine, &input, true)?;
    let mut residual = kdv_pde_residual_of(&f);
    residual.retain(|m, _| window.contains(m));
    Ok(residual)
}

/// Values of `diff` on every monomial of `window` that appears in any of
/// the `sources`, zeros included.
fn window_coefficients<T: Scalar, const N: usize>(
    diff: &TruncatedSeries<T>,
    window: &SeriesCutoff,
    sources: [&TruncatedSeries<T>; N],
) -> BTreeMap<Monomial, T> {
    let mut out = BTreeMap::new();
    for s in sources.iter().copied().chain(std::iter::once(diff)) {
        for (m, _) in s.terms() {
            if window.contains(m) {
                out.entry(m.clone()).or_insert_with(|| diff.coefficient(m));
            }
        }
    }
    out
}

/// `log Z` with `t_k → t_k + p_k(s)` for `k ≥ 1`, on `window`.
pub fn shifted_free_energy<T: Scalar>(
    engine: &Engine<T>,
    window: &SeriesCutoff,
    mode: ShiftMode,
) -> Result<TruncatedSeries<T>> {
    let s = window.max_s_weight;
    let source = SeriesCutoff::new(window.max_genus, window.max_points + s, window.max_t_index.max(s), 0);
    let z = build_free_energy(engine, &source, false)?;
    let shifts: Vec<TruncatedSeries<T>> = (0..=source.max_t_index)
        .map(|k| {
            let mut p = TruncatedSeries::zero(*window);
            p.add_term(Monomial::t_var(k), T::one());
            if k >= 1 {
                for (l, c) in p_polynomial::<T>(k, mode, s) {
                    p.add_term(Monomial::new(0, Vec::new(), l), c);
                }
            }
            p
        })
        .collect();
    let mut powers: BTreeMap<(usize, u32), TruncatedSeries<T>> = BTreeMap::new();
    let mut out = TruncatedSeries::zero(*window);
    for (m, c) in z.terms() {
        let mut term = TruncatedSeries::zero(*window);
        term.add_term(Monomial::new(m.hbar, Vec::new(), MultiIndex::zero()), c.clone());
        for (k, &e) in m.t.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let power = powers
                .entry((k, e))
                .or_insert_with(|| (0..e).fold(TruncatedSeries::one(*window), |acc, _| acc.mul(&shifts[k])));
            term = term.mul(power);
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// `log G − log Z(t + p(s))` on `window`, zeros included for every monomial
/// present on either side.
pub fn shift_compare<T: Scalar>(
    engine: &Engine<T>,
    window: &SeriesCutoff,
    mode: ShiftMode,
) -> Result<BTreeMap<Monomial, T>> {
    let lhs = build_free_energy(engine, window, true)?;
    let rhs = shifted_free_energy(engine, window, mode)?;
    let diff = lhs.sub(&rhs);
    Ok(window_coefficients(&diff, window, [&lhs, &rhs]))
}

/// Entries of a residual map that do not vanish.
pub fn nonzero<T: Scalar>(residual: &BTreeMap<Monomial, T>) -> Vec<(Monomial, T)> {
    residual.iter().filter(|(_, v)| !v.is_zero()).map(|(m, v)| (m.clone(), v.clone())).collect()
}
