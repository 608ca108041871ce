//! Acceptance criteria 1 to 10, one pass/fail line each. Exits nonzero if
//! any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use swp_core::combinatorics::{
    beta_by_direct_inversion, beta_coefficients, double_factorial, factorial, indices_of_size, indices_of_weight,
    secant_numbers,
};
use swp_core::correlator::{closed_genus1, closed_one_point, closed_two_point, degree_valid_keys, IdentityKind};
use swp_core::kernel::{
    beta_moment_constant, calibrate_c_d, h_polynomial, quadrature_oracle, sw_difference, QuadratureKind,
};
use swp_core::tau::{
    commutator_residual, kdv_pde_residual, nonzero, shift_compare, virasoro_residual, OperatorFamily, SeriesCutoff,
};
use swp_core::volumes::{normalized_volume, thm16_residual, thm17_residual, volume_polynomial, Thm17Variant};
use swp_core::{Coefficients, CorrelatorKey, Engine, MultiIndex, Rational, Scalar, ShiftMode, Strategy};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

fn err(e: swp_core::Error) -> String {
    e.to_string()
}

fn published_constants() -> Outcome {
    let start = Instant::now();
    let engine = Engine::new();
    let cases = [
        (CorrelatorKey::pure(1, vec![0]), Rational::ratio(1, 8)),
        (CorrelatorKey::new(2, MultiIndex::delta(1), vec![]), Rational::ratio(3, 128)),
        (CorrelatorKey::pure(3, vec![1, 1]), Rational::ratio(63, 512)),
        (CorrelatorKey::pure(6, vec![2, 3]), Rational::ratio(7949025, 2097152)),
        (CorrelatorKey::pure(9, vec![4, 4]), Rational::ratio(8093029715505, 8589934592)),
    ];
    for (key, want) in &cases {
        let got = engine.value(key).map_err(err)?;
        ensure(&got == want, || format!("{key}: {got} != {want}"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{} values", cases.len()))
}

fn closed_formulas() -> Outcome {
    let engine = Engine::new();
    let mut count = 0;
    let mut check = |key: CorrelatorKey, want: Rational| -> Result<(), String> {
        count += 1;
        let got = engine.correlator(&key, Strategy::KmzDvv).map_err(err)?;
        ensure(got == want, || format!("{key}: {got} != {want}"))
    };
    for n in 1..=10u32 {
        check(CorrelatorKey::pure(1, vec![0; n as usize]), closed_genus1(n).map_err(err)?)?;
    }
    for g in 1..=10u32 {
        check(CorrelatorKey::pure(g, vec![g - 1]), closed_one_point(g).map_err(err)?)?;
    }
    for g in 1..=9u32 {
        for k in 0..=(g - 1) / 2 {
            check(CorrelatorKey::pure(g, vec![k, g - 1 - k]), closed_two_point(g, k).map_err(err)?)?;
        }
    }
    Ok(format!("{count} closed values"))
}

fn cross_strategy() -> Outcome {
    let start = Instant::now();
    let keys = degree_valid_keys(6, 4, 3);
    let engines: Vec<(Strategy, Engine)> = Strategy::RECURSIVE.iter().map(|&s| (s, Engine::new())).collect();
    for key in &keys {
        let reference = engines[0].1.correlator(key, engines[0].0).map_err(err)?;
        for (s, engine) in &engines[1..] {
            let v = engine.correlator(key, *s).map_err(err)?;
            ensure(v == reference, || format!("{key}: {} gives {v}, kmz gives {reference}", s.name()))?;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{} keys, 3 strategies", keys.len()))
}

fn coefficient_systems() -> Outcome {
    let c = Coefficients::new();
    ensure(c.convolution(&MultiIndex::zero()).is_one(), || "weight 0".into())?;
    let mut count = 1;
    for w in 1..=12 {
        for b in indices_of_weight(w) {
            count += 1;
            ensure(c.convolution(&b).is_zero(), || format!("convolution at {b}"))?;
        }
    }
    let beta = beta_coefficients::<Rational>(10);
    for l in 0..=10u32 {
        let want = beta[l as usize].clone() * Rational::from_bigint(&factorial(l));
        ensure(c.alpha(&MultiIndex::first(l)) == want, || format!("alpha row at l={l}"))?;
    }
    ensure(beta == beta_by_direct_inversion::<Rational>(10), || "beta routes differ".into())?;
    let mut inconsistent = 0;
    for l in 1..=10i64 {
        let printed = Rational::one() / Rational::from_bigint(&double_factorial(2 * l + 1).map_err(err)?);
        if c.alpha(&MultiIndex::delta(l as usize)) != printed {
            inconsistent += 1;
        }
    }
    ensure(inconsistent > 0, || "alpha(δ_l) = 1/(2l+1)!! unexpectedly holds".into())?;
    Ok(format!("{count} convolutions; alpha(δ_l) claim inconsistent at {inconsistent}/10"))
}

fn identity_residuals() -> Outcome {
    let engine = Engine::new();
    let mut count = 0;
    for key in degree_valid_keys(5, 4, 3) {
        for kind in IdentityKind::ALL {
            if matches!(kind, IdentityKind::Dilaton | IdentityKind::Kdv) && !key.kappa.is_zero() {
                continue;
            }
            count += 1;
            let r = engine.identity_residual(kind, &key).map_err(err)?;
            ensure(r.is_zero(), || format!("{} at {key}: {r}", kind.name()))?;
        }
    }
    Ok(format!("{count} residuals"))
}

fn volume_identities() -> Outcome {
    let engine = Engine::new();
    for g in 1..=4u32 {
        for n in 0..=3usize {
            if (g, n) == (1, 0) {
                continue;
            }
            let v = volume_polynomial(&engine, g, n).map_err(err)?.rescale_to_normalized(g).map_err(err)?;
            ensure(v == normalized_volume(&engine, g, n).map_err(err)?, || format!("normalization ({g},{n})"))?;
        }
    }
    let mut count = 0;
    for g in 1..=5u32 {
        for n in 0..=3usize {
            if (g, n) == (1, 0) {
                continue;
            }
            for size in 0..=3 {
                for b in indices_of_size(size, g - 1) {
                    count += 1;
                    let r = thm16_residual(&engine, g, n, &b).map_err(err)?;
                    ensure(r.is_zero(), || format!("g={g} n={n} b={b}: {r}"))?;
                }
            }
        }
    }
    let mut vanishing = Vec::new();
    for variant in Thm17Variant::ALL {
        let mut all_zero = true;
        for g in 2..=4u32 {
            for b in indices_of_weight(g - 1) {
                all_zero &= thm17_residual(&engine, g, &b, variant).map_err(err)?.is_zero();
            }
        }
        if all_zero {
            vanishing.push(variant.name());
        }
    }
    ensure(vanishing.len() == 1, || format!("vanishing variants {vanishing:?}"))?;
    Ok(format!("{count} recursion residuals; vanishing variant {}", vanishing[0]))
}

fn operator_suite() -> Outcome {
    let engine = Engine::new();
    let window = SeriesCutoff::new(4, 5, 3, 3);
    let mut monomials = 0;
    for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
        for k in 0..=3 {
            let r = virasoro_residual(&engine, family, k, &window).map_err(err)?;
            ensure(!r.is_empty(), || format!("{} k={k}: nothing checked", family.name()))?;
            ensure(nonzero(&r).is_empty(), || format!("{} k={k}: {} nonzero", family.name(), nonzero(&r).len()))?;
            monomials += r.len();
        }
    }
    let cutoff = SeriesCutoff::new(4, 5, 10, 3);
    for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
        for n in 0..=3 {
            for m in 0..n {
                let r = commutator_residual(engine.coefficients(), family, n, m, &cutoff);
                ensure(r.is_zero(), || format!("{} [{n},{m}]: {} terms", family.name(), r.len()))?;
            }
        }
    }
    let kdv = kdv_pde_residual(&engine, &window).map_err(err)?;
    ensure(!kdv.is_empty() && nonzero(&kdv).is_empty(), || "kdv residual".into())?;
    Ok(format!("{monomials} annihilation monomials, 12 commutators, {} KdV monomials", kdv.len()))
}

fn shift_identity() -> Outcome {
    let engine = Engine::new();
    let base = SeriesCutoff::new(3, 3, 3, 3);
    let mut resolved = Vec::new();
    for window in [base, base.enlarged(1)] {
        let mut zero = Vec::new();
        for mode in [ShiftMode::Weighted, ShiftMode::Counted] {
            let r = shift_compare(&engine, &window, mode).map_err(err)?;
            if !r.is_empty() && nonzero(&r).is_empty() {
                zero.push(mode.name());
            }
        }
        ensure(zero.len() == 1, || format!("{window:?}: zero modes {zero:?}"))?;
        resolved.push(zero[0]);
    }
    ensure(resolved[0] == resolved[1], || format!("unstable: {resolved:?}"))?;
    Ok(format!("mode {} stable under enlargement", resolved[0]))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn appendix() -> Outcome {
    let engine = Engine::new();
    let c = calibrate_c_d(&engine).map_err(err)?;
    for (g, n) in [(1, 2), (2, 1), (2, 2), (3, 1)] {
        let d = sw_difference(&engine, g, n, &c).map_err(err)?;
        ensure(d.is_zero(), || format!("({g},{n}): {d}"))?;
    }
    for k in 0..=5u32 {
        for t in [0.5, 1.0, 2.0, 5.0] {
            let exact = h_polynomial::<f64>(k).evaluate(&t);
            let numeric = quadrature_oracle(QuadratureKind::H { k }, t).map_err(err)?;
            ensure(rel(numeric, exact) < 1e-9, || format!("h_{k}({t}): {numeric} vs {exact}"))?;
        }
    }
    for a in 0..=2u32 {
        for b in 0..=2u32 {
            let (cab, m) = beta_moment_constant::<Rational>(a, b);
            let moment =
                h_polynomial::<Rational>(m).evaluate(&Rational::one()) * Rational::from_bigint(&factorial(2 * m + 1));
            let exact = (cab * moment).to_f64();
            let numeric = quadrature_oracle(QuadratureKind::DoubleMoment { a, b }, 1.0).map_err(err)?;
            ensure(rel(numeric, exact) < 1e-8, || format!("beta ({a},{b}): {numeric} vs {exact}"))?;
        }
    }
    let secant = secant_numbers::<Rational>(3);
    for (n, want) in [1.0, 1.0, 5.0, 61.0].into_iter().enumerate() {
        let numeric = quadrature_oracle(QuadratureKind::SechMoment { n: n as u32 }, 0.0).map_err(err)?;
        ensure(rel(numeric, want) < 1e-9 && secant[n].to_f64() == want, || format!("a_{n}: {numeric}"))?;
    }
    Ok(format!("c_D* = {}", swp_core::scalar::render_rational(&c)))
}

fn swp(args: &[&str]) -> Result<(Option<i32>, String), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_swp"))
        .env_remove("SWP_CACHE")
        .arg("--no-cache")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((o.status.code(), String::from_utf8_lossy(&o.stdout).into_owned()))
}

fn cli_goldens() -> Outcome {
    let goldens: [(&[&str], &str); 6] = [
        (&["corr", "-g", "3", "--kappa", "", "--psi", "1,1"], "63/512\n"),
        (&["corr", "-g", "2", "--kappa", "1:1", "--psi", ""], "3/128\n"),
        (&["corr", "-g", "1", "--kappa", "", "--psi", "1"], "0\n"),
        (&["volume", "-g", "1", "-n", "1", "-v", "normalized"], "1/8\n"),
        (&["volume", "-g", "2", "-n", "1", "-v", "normalized"], "9/128 + 3/128*L1^2\n"),
        (&["volume", "-g", "2", "-n", "1", "-v", "plain"], "9/64*pi^2 + 3/256*L1^2\n"),
    ];
    for (args, want) in goldens {
        let (code, out) = swp(args)?;
        ensure(code == Some(0) && out == want, || format!("{args:?}: {code:?} {out:?}"))?;
    }
    ensure(swp(&["corr", "-g", "1"])?.0 == Some(3), || "g=1 n=0 exit code".into())?;
    ensure(swp(&["volume", "-g", "1", "-n", "0"])?.0 == Some(3), || "(1,0) volume exit code".into())?;
    ensure(swp(&["corr", "-g", "3", "--kappa", "x"])?.0 == Some(2), || "parse error exit code".into())?;
    let (_, t1) = swp(&["table", "--g-max", "1", "--weight-max", "1"])?;
    ensure(t1.lines().any(|l| l == "1,,0,1/8"), || format!("g_max=1 table: {t1}"))?;
    let (_, t2) = swp(&["table", "--g-max", "2", "--weight-max", "2"])?;
    ensure(t2.lines().any(|l| l == "2,1:1,,3/128"), || format!("g_max=2 table: {t2}"))?;

    let start = Instant::now();
    let (code, report) = swp(&["verify", "--suite", "all"])?;
    let elapsed = start.elapsed();
    ensure(code == Some(0), || format!("verify --suite all exited {code:?}: {report}"))?;
    within(start, Duration::from_secs(15 * 60))?;
    Ok(format!("9 goldens and exit codes; verify --suite all in {:.1} s", elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("published constants", published_constants),
        ("closed formulas", closed_formulas),
        ("cross-strategy equivalence", cross_strategy),
        ("coefficient systems", coefficient_systems),
        ("identity residuals", identity_residuals),
        ("volume identities", volume_identities),
        ("operator suite", operator_suite),
        ("shift identity", shift_identity),
        ("kernel recursion and quadrature", appendix),
        ("cli goldens and full verification", cli_goldens),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} ({secs:.2} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg} ({secs:.2} s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
