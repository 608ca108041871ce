use swp_core::tau::{
    build_free_energy, build_tau_function, commutator_residual, kdv_pde_residual, nonzero, shift_compare,
    virasoro_residual, virasoro_v, virasoro_v_from_hat, OperatorFamily, SeriesCutoff,
};
use swp_core::{Coefficients, Engine, ShiftMode};

fn window() -> SeriesCutoff {
    SeriesCutoff::new(4, 5, 3, 3)
}

#[test]
fn virasoro_annihilates_tau_function() {
    let engine = Engine::new();
    for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
        for k in 0..=3 {
            let r = virasoro_residual(&engine, family, k, &window()).unwrap();
            assert!(!r.is_empty(), "{family:?} k={k}: nothing checked");
            assert!(nonzero(&r).is_empty(), "{family:?} k={k}: {:?}", nonzero(&r));
        }
    }
}

#[test]
fn commutators() {
    let coeffs = Coefficients::new();
    let cutoff = SeriesCutoff::new(4, 5, 10, 3);
    for family in [OperatorFamily::Hat, OperatorFamily::Plain] {
        for n in 0..=3 {
            for m in 0..n {
                let r = commutator_residual(&coeffs, family, n, m, &cutoff);
                assert!(r.is_zero(), "{family:?} [{n},{m}]: {} terms", r.len());
            }
        }
    }
}

#[test]
fn plain_operators_two_constructions() {
    let coeffs = Coefficients::new();
    let cutoff = SeriesCutoff::new(4, 5, 10, 3);
    for k in 0..=3 {
        assert_eq!(virasoro_v(&coeffs, k, &cutoff), virasoro_v_from_hat(&coeffs, k, &cutoff));
    }
}

#[test]
fn kdv_pde() {
    let engine = Engine::new();
    let r = kdv_pde_residual(&engine, &window()).unwrap();
    assert!(!r.is_empty());
    assert!(nonzero(&r).is_empty(), "{:?}", nonzero(&r));
}

#[test]
fn shift_identity_selects_weighted_mode() {
    let engine = Engine::new();
    for w in [SeriesCutoff::new(4, 3, 3, 3), SeriesCutoff::new(4, 3, 3, 3).enlarged(1)] {
        let weighted = shift_compare(&engine, &w, ShiftMode::Weighted).unwrap();
        let counted = shift_compare(&engine, &w, ShiftMode::Counted).unwrap();
        assert!(nonzero(&weighted).is_empty(), "{:?}", nonzero(&weighted));
        assert!(!nonzero(&counted).is_empty());
    }
}

#[test]
fn window_soundness() {
    let engine = Engine::new();
    let small = SeriesCutoff::new(3, 3, 2, 2);
    let large = small.enlarged(1);
    for with_kappa in [false, true] {
        let a = build_tau_function(&engine, &small, with_kappa).unwrap();
        let b = build_tau_function(&engine, &large, with_kappa).unwrap().truncate(small);
        assert_eq!(a, b);
        let f = build_free_energy(&engine, &large, with_kappa).unwrap();
        assert_eq!(build_free_energy(&engine, &small, with_kappa).unwrap(), f.truncate(small));
    }
}
