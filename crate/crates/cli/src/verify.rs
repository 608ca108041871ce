//! Orchestrated verification: every suite evaluates exact identities over a
//! bounded range and records one entry per check.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::{Args, ValueEnum};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use swp_core::combinatorics::{
    beta_by_direct_inversion, beta_coefficients, double_factorial, factorial, indices_of_size, indices_of_weight,
    secant_numbers,
};
use swp_core::correlator::{closed_genus1, closed_one_point, closed_two_point, degree_valid_keys, IdentityKind};
use swp_core::kernel::{
    beta_moment_constant, calibrate_c_d, h_polynomial, quadrature_oracle, sw_difference, KappaOneRecursion,
    QuadratureKind,
};
use swp_core::scalar::render_rational;
use swp_core::tau::{
    commutator_residual, kdv_pde_residual, nonzero, shift_compare, virasoro_residual, OperatorFamily, SeriesCutoff,
};
use swp_core::volumes::{
    higher_volume, normalized_volume, thm16_residual, thm17_residual, volume_polynomial, Thm17Variant,
};
use swp_core::{Coefficients, CorrelatorKey, Engine, MultiIndex, Rational, Scalar, ShiftMode, Strategy};

/// Failure messages kept per check.
const MAX_MESSAGES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Coefficients,
    Closed,
    Cross,
    Identities,
    Volumes,
    Virasoro,
    Kdv,
    Shift,
    Appendix,
}

impl Suite {
    /// The suites `all` runs, in order.
    pub const EACH: [Suite; 9] = [
        Suite::Coefficients,
        Suite::Closed,
        Suite::Cross,
        Suite::Identities,
        Suite::Volumes,
        Suite::Virasoro,
        Suite::Kdv,
        Suite::Shift,
        Suite::Appendix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Coefficients => "coefficients",
            Suite::Closed => "closed",
            Suite::Cross => "cross",
            Suite::Identities => "identities",
            Suite::Volumes => "volumes",
            Suite::Virasoro => "virasoro",
            Suite::Kdv => "kdv",
            Suite::Shift => "shift",
            Suite::Appendix => "appendix",
        }
    }
}

/// Optional overrides of each suite's default ranges.
#[derive(Clone, Debug, Default, Args)]
pub struct Bounds {
    /// Largest genus checked.
    #[arg(long)]
    pub max_genus: Option<u32>,
    /// Most ψ insertions per correlator, or t-degree per series monomial.
    #[arg(long)]
    pub max_points: Option<u32>,
    /// Most κ classes per correlator.
    #[arg(long)]
    pub max_kappa: Option<u32>,
    /// Largest s-weight of series monomials.
    #[arg(long)]
    pub max_s_weight: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub status: Status,
    /// Cases evaluated.
    pub count: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// How the ambiguous statements resolved.
    pub findings: BTreeMap<String, Value>,
    /// Wall time per suite; the only nondeterministic field.
    pub timings_ms: BTreeMap<String, u64>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
    findings: BTreeMap<String, Value>,
}

impl Recorder {
    /// Records a check over `count` cases with the given failure messages.
    fn record(&mut self, name: impl Into<String>, count: usize, failures: Vec<String>) {
        let failed = failures.len();
        let status = if failed == 0 && count > 0 { Status::Pass } else { Status::Fail };
        let mut messages: Vec<String> = failures.into_iter().take(MAX_MESSAGES).collect();
        if count == 0 {
            messages.push("no cases evaluated".into());
        }
        self.checks.push(Check { suite: self.suite, name: name.into(), status, count, failed, messages });
    }

    /// Records a check whose cases each yield `Ok(None)` on success.
    fn cases<I>(&mut self, name: impl Into<String>, results: I)
    where
        I: IntoIterator<Item = swp_core::Result<Option<String>>>,
    {
        let mut count = 0;
        let mut failures = Vec::new();
        for r in results {
            count += 1;
            match r {
                Ok(None) => {}
                Ok(Some(msg)) => failures.push(msg),
                Err(e) => failures.push(e.to_string()),
            }
        }
        self.record(name, count, failures);
    }

    fn finding(&mut self, name: &str, value: Value) {
        self.findings.insert(name.into(), value);
    }
}

fn mismatch<T: PartialEq + std::fmt::Display>(what: impl std::fmt::Display, got: &T, want: &T) -> Option<String> {
    (got != want).then(|| format!("{what}: got {got}, expected {want}"))
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

/// Runs `suite` (every suite for [`Suite::All`]) on `engine`.
pub fn run_suite(engine: &Engine, suite: Suite, bounds: &Bounds) -> VerifyReport {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut report = VerifyReport {
        suite: suite.name(),
        passed: true,
        checks: Vec::new(),
        findings: BTreeMap::new(),
        timings_ms: BTreeMap::new(),
    };
    let total = Instant::now();
    for s in suites {
        let start = Instant::now();
        let mut rec = Recorder { suite: s.name(), checks: Vec::new(), findings: BTreeMap::new() };
        match s {
            Suite::All => unreachable!(),
            Suite::Coefficients => coefficients(&mut rec),
            Suite::Closed => closed(engine, bounds, &mut rec),
            Suite::Cross => cross(engine, bounds, &mut rec),
            Suite::Identities => identities(engine, bounds, &mut rec),
            Suite::Volumes => volumes(engine, bounds, &mut rec),
            Suite::Virasoro => virasoro(engine, bounds, &mut rec),
            Suite::Kdv => kdv(engine, bounds, &mut rec),
            Suite::Shift => shift(engine, bounds, &mut rec),
            Suite::Appendix => appendix(engine, bounds, &mut rec),
        }
        report.checks.extend(rec.checks);
        report.findings.extend(rec.findings);
        report.timings_ms.insert(s.name().into(), start.elapsed().as_millis() as u64);
    }
    report.timings_ms.insert("total".into(), total.elapsed().as_millis() as u64);
    report.passed = report.failed() == 0;
    report
}

fn coefficients(rec: &mut Recorder) {
    let c = Coefficients::new();
    let mut results = vec![Ok(mismatch("weight 0", &c.convolution(&MultiIndex::zero()), &Rational::one()))];
    for w in 1..=12 {
        for b in indices_of_weight(w) {
            results.push(Ok(mismatch(format!("b={b}"), &c.convolution(&b), &Rational::zero())));
        }
    }
    rec.cases("alpha_gamma_convolution", results);

    let beta = beta_coefficients::<Rational>(10);
    rec.cases(
        "alpha_first_row",
        (0..=10u32).map(|l| {
            let want = beta[l as usize].clone() * Rational::from_bigint(&factorial(l));
            Ok(mismatch(format!("l={l}"), &c.alpha(&MultiIndex::first(l)), &want))
        }),
    );

    let inverted = beta_by_direct_inversion::<Rational>(10);
    rec.cases("beta_two_routes", (0..=10).map(|b| Ok(mismatch(format!("b={b}"), &beta[b], &inverted[b]))));

    let mut printed_mismatches = 0;
    let results: Vec<_> = (1..=6i64)
        .map(|l| {
            let got = c.alpha(&MultiIndex::delta(l as usize));
            let printed = Rational::one() / Rational::from_bigint(&double_factorial(2 * l + 1)?);
            if got != printed {
                printed_mismatches += 1;
            }
            let odd = Rational::one() / Rational::from_bigint(&double_factorial(2 * l - 1)?);
            Ok(mismatch(format!("l={l}"), &got, &odd))
        })
        .collect();
    rec.cases("alpha_single_delta", results);
    let claim = if printed_mismatches > 0 { "inconsistent" } else { "consistent" };
    rec.finding("alpha_delta_printed_claim", json!(claim));
}

fn closed(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let published = [
        (CorrelatorKey::pure(1, vec![0]), ratio(1, 8)),
        (CorrelatorKey::new(2, MultiIndex::delta(1), vec![]), ratio(3, 128)),
        (CorrelatorKey::pure(3, vec![1, 1]), ratio(63, 512)),
        (CorrelatorKey::pure(6, vec![2, 3]), ratio(7949025, 2097152)),
        (CorrelatorKey::pure(9, vec![4, 4]), ratio(8093029715505, 8589934592)),
    ];
    rec.cases(
        "published_constants",
        published.iter().map(|(k, want)| Ok(mismatch(k, &engine.correlator(k, Strategy::KmzDvv)?, want))),
    );
    rec.cases(
        "published_constants_closed",
        published[2..].iter().map(|(k, want)| Ok(mismatch(k, &closed_two_point::<Rational>(k.genus, k.psi[1])?, want))),
    );

    let recursion = |k: &CorrelatorKey| engine.correlator(k, Strategy::KmzDvv);
    rec.cases(
        "genus_one",
        (1..=10u32).map(|n| {
            let k = CorrelatorKey::pure(1, vec![0; n as usize]);
            Ok(mismatch(&k, &recursion(&k)?, &closed_genus1(n)?))
        }),
    );
    let g_one = bounds.max_genus.unwrap_or(10);
    rec.cases(
        "one_point",
        (1..=g_one).map(|g| {
            let k = CorrelatorKey::pure(g, vec![g - 1]);
            Ok(mismatch(&k, &recursion(&k)?, &closed_one_point(g)?))
        }),
    );
    let g_two = bounds.max_genus.unwrap_or(9);
    let pairs: Vec<(u32, u32)> = (1..=g_two).flat_map(|g| (0..=(g - 1) / 2).map(move |k| (g, k))).collect();
    rec.cases(
        "two_point",
        pairs.into_iter().map(|(g, k)| {
            let key = CorrelatorKey::pure(g, vec![k, g - 1 - k]);
            Ok(mismatch(&key, &recursion(&key)?, &closed_two_point(g, k)?))
        }),
    );
}

fn correlator_keys(bounds: &Bounds, max_genus: u32) -> Vec<CorrelatorKey> {
    degree_valid_keys(
        bounds.max_genus.unwrap_or(max_genus),
        bounds.max_points.unwrap_or(4) as usize,
        bounds.max_kappa.unwrap_or(3),
    )
}

fn cross(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let keys = correlator_keys(bounds, 6);
    let results: Vec<_> = keys
        .par_iter()
        .map(|k| {
            let values = Strategy::RECURSIVE
                .iter()
                .map(|&s| engine.correlator(k, s).map(|v| (s, v)))
                .collect::<swp_core::Result<Vec<_>>>()?;
            let (_, reference) = &values[0];
            Ok(values[1..]
                .iter()
                .find(|(_, v)| v != reference)
                .map(|(s, v)| format!("{k}: {} gives {v}, kmz gives {reference}", s.name())))
        })
        .collect();
    rec.cases("three_strategies_agree", results);
}

fn identities(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let keys = correlator_keys(bounds, 5);
    for kind in IdentityKind::ALL {
        let pure_only = matches!(kind, IdentityKind::Dilaton | IdentityKind::Kdv);
        let results: Vec<_> = keys
            .par_iter()
            .filter(|k| !pure_only || k.kappa.is_zero())
            .map(|k| {
                let r = engine.identity_residual(kind, k)?;
                Ok((!r.is_zero()).then(|| format!("{k}: {r}")))
            })
            .collect();
        rec.cases(kind.name(), results);
    }
}

fn volumes(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let gn = |max_genus: u32| -> Vec<(u32, usize)> {
        (1..=max_genus).flat_map(|g| (0..=3usize).map(move |n| (g, n))).filter(|&gn| gn != (1, 0)).collect()
    };
    rec.cases(
        "normalization",
        gn(bounds.max_genus.unwrap_or(4)).into_iter().map(|(g, n)| {
            let v = volume_polynomial(engine, g, n)?.rescale_to_normalized(g)?;
            Ok(mismatch(format!("({g},{n})"), &v, &normalized_volume(engine, g, n)?))
        }),
    );

    let max_kappa = bounds.max_kappa.unwrap_or(3);
    let cases: Vec<(u32, usize, MultiIndex)> = gn(bounds.max_genus.unwrap_or(5))
        .into_iter()
        .flat_map(|(g, n)| {
            (0..=max_kappa).flat_map(move |size| indices_of_size(size, g - 1).into_iter().map(move |b| (g, n, b)))
        })
        .collect();
    let results: Vec<_> = cases
        .par_iter()
        .map(|(g, n, b)| {
            let r = thm16_residual(engine, *g, *n, b)?;
            Ok((!r.is_zero()).then(|| format!("g={g} n={n} b={b}: {r}")))
        })
        .collect();
    rec.cases("higher_volume_recursion", results);

    let mut vanishing = Vec::new();
    let mut count = 0;
    let mut errors = Vec::new();
    for variant in Thm17Variant::ALL {
        let mut failures = 0;
        for g in 2..=bounds.max_genus.unwrap_or(4) {
            for b in indices_of_weight(g - 1) {
                count += 1;
                match thm17_residual(engine, g, &b, variant) {
                    Ok(r) if r.is_zero() => {}
                    Ok(_) => failures += 1,
                    Err(e) => errors.push(e.to_string()),
                }
            }
        }
        if failures == 0 {
            vanishing.push(variant.name());
        }
    }
    if vanishing.len() != 1 {
        errors.push(format!("vanishing variants: {vanishing:?}"));
    }
    rec.record("kappa_only_variant", count, errors);
    let finding = match vanishing.as_slice() {
        [one] => json!(one),
        _ => json!(vanishing),
    };
    rec.finding("thm17_variant", finding);

    let pairs: Vec<(u32, MultiIndex)> = (2..=bounds.max_genus.unwrap_or(5))
        .flat_map(|g| indices_of_weight(g - 1).into_iter().map(move |b| (g, b)))
        .collect();
    rec.cases(
        "no_points_two_routes",
        pairs.into_iter().map(|(g, b)| {
            let direct = engine.value(&CorrelatorKey::new(g, b.clone(), vec![]))?;
            Ok(mismatch(format!("g={g} b={b}"), &higher_volume(engine, g, 0, &b)?, &direct))
        }),
    );
}

fn series_window(bounds: &Bounds, max_genus: u32, max_points: u32) -> SeriesCutoff {
    SeriesCutoff::new(
        bounds.max_genus.unwrap_or(max_genus),
        bounds.max_points.unwrap_or(max_points),
        3,
        bounds.max_s_weight.unwrap_or(3),
    )
}

fn residual_message(r: &BTreeMap<swp_core::tau::Monomial, Rational>) -> Option<String> {
    if r.is_empty() {
        return Some("no monomials checked".into());
    }
    let bad = nonzero(r);
    (!bad.is_empty()).then(|| {
        let (m, v) = &bad[0];
        format!("{} nonzero coefficients, first {} = {}", bad.len(), m.render(), render_rational(v))
    })
}

fn virasoro(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let window = series_window(bounds, 4, 5);
    for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
        rec.cases(
            format!("{}_annihilation", family.name()),
            (0..=3).map(|k| {
                Ok(residual_message(&virasoro_residual(engine, family, k, &window)?).map(|m| format!("k={k}: {m}")))
            }),
        );
    }
    let cutoff = SeriesCutoff::new(window.max_genus, window.max_points, 10, window.max_s_weight);
    let coeffs = engine.coefficients();
    for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
        let pairs: Vec<(u32, u32)> = (1..=3).flat_map(|n| (0..n).map(move |m| (n, m))).collect();
        let results: Vec<_> = pairs
            .par_iter()
            .map(|&(n, m)| {
                let r = commutator_residual(coeffs, family, n, m, &cutoff);
                Ok((!r.is_zero()).then(|| format!("[{n},{m}]: {} terms", r.len())))
            })
            .collect();
        rec.cases(format!("{}_commutators", family.name()), results);
    }
}

fn kdv(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let window = series_window(bounds, 4, 5);
    rec.cases("kdv_pde", [kdv_pde_residual(engine, &window).map(|r| residual_message(&r))]);
}

fn shift(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    let base = series_window(bounds, 3, 3);
    let mut resolved = Vec::new();
    let mut count = 0;
    let mut errors = Vec::new();
    for window in [base, base.enlarged(1)] {
        let mut zero_modes = Vec::new();
        for mode in [ShiftMode::Weighted, ShiftMode::Counted] {
            count += 1;
            match shift_compare(engine, &window, mode) {
                Ok(r) if !r.is_empty() && nonzero(&r).is_empty() => zero_modes.push(mode.name()),
                Ok(_) => {}
                Err(e) => errors.push(e.to_string()),
            }
        }
        if zero_modes.len() != 1 {
            errors.push(format!("window {window:?}: modes with zero residual {zero_modes:?}"));
        }
        resolved.push(zero_modes);
    }
    if resolved[0] != resolved[1] {
        errors.push(format!("mode changes under enlargement: {resolved:?}"));
    }
    rec.record("single_stable_mode", count, errors);
    let finding = match resolved[0].as_slice() {
        [one] => json!(one),
        modes => json!(modes),
    };
    rec.finding("shift_mode", finding);
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn numeric(what: impl std::fmt::Display, got: f64, want: f64, tol: f64) -> Option<String> {
    (rel(got, want).is_nan() || rel(got, want) >= tol).then(|| format!("{what}: {got} vs {want}"))
}

fn appendix(engine: &Engine, bounds: &Bounds, rec: &mut Recorder) {
    match calibrate_c_d(engine) {
        Ok(c) => {
            rec.finding("c_d", json!(render_rational(&c)));
            rec.cases(
                "kernel_recursion",
                [(1, 2), (2, 1), (2, 2), (3, 1), (2, 3), (3, 2), (4, 1)].into_iter().map(|(g, n)| {
                    let d = sw_difference(engine, g, n, &c)?;
                    Ok((!d.is_zero()).then(|| format!("({g},{n}): {d}")))
                }),
            );
        }
        Err(e) => rec.record("kernel_recursion", 1, vec![format!("calibration: {e}")]),
    }

    let h_cases: Vec<(u32, i64, i64)> =
        (0..=5).flat_map(|k| [(1, 2), (1, 1), (2, 1)].into_iter().map(move |(n, d)| (k, n, d))).collect();
    rec.cases(
        "h_quadrature",
        h_cases.into_iter().map(|(k, n, d)| {
            let exact = h_polynomial::<Rational>(k).evaluate(&ratio(n, d)).to_f64();
            let t = n as f64 / d as f64;
            Ok(numeric(format!("k={k} t={t}"), quadrature_oracle(QuadratureKind::H { k }, t)?, exact, 1e-9))
        }),
    );

    let ab: Vec<(u32, u32)> = (0..=2).flat_map(|a| (0..=2).map(move |b| (a, b))).collect();
    rec.cases(
        "beta_constants_quadrature",
        ab.into_iter().map(|(a, b)| {
            let (c, m) = beta_moment_constant::<Rational>(a, b);
            let moment =
                h_polynomial::<Rational>(m).evaluate(&Rational::one()) * Rational::from_bigint(&factorial(2 * m + 1));
            let exact = (c * moment).to_f64();
            Ok(numeric(
                format!("({a},{b})"),
                quadrature_oracle(QuadratureKind::DoubleMoment { a, b }, 1.0)?,
                exact,
                1e-8,
            ))
        }),
    );

    let secant = secant_numbers::<Rational>(3);
    let expected = [1, 1, 5, 61];
    rec.cases(
        "sech_moments",
        (0..=3u32).map(|n| {
            let exact = &secant[n as usize];
            if let Some(m) = mismatch(format!("a_{n}"), exact, &Rational::from_i64(expected[n as usize])) {
                return Ok(Some(m));
            }
            Ok(numeric(
                format!("a_{n}"),
                quadrature_oracle(QuadratureKind::SechMoment { n }, 0.0)?,
                exact.to_f64(),
                1e-9,
            ))
        }),
    );

    let max_genus = bounds.max_genus.unwrap_or(5);
    let kappa_one = KappaOneRecursion::<Rational>::new(max_genus);
    let keys: Vec<CorrelatorKey> = degree_valid_keys(max_genus, 3, max_genus)
        .into_iter()
        .filter(|k| k.n() >= 1 && k.kappa == MultiIndex::first(k.kappa.size()))
        .collect();
    rec.cases(
        "kappa_one_recursion",
        keys.iter().map(|k| {
            let a = k.kappa.size();
            Ok(mismatch(k, &kappa_one.value(k.genus, a, &k.psi)?, &engine.value(k)?))
        }),
    );
}
