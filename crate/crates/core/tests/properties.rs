use std::f64::consts::E;

use num_complex::Complex64;
use proptest::prelude::*;

use tds_spectrum::demo::{counterexample_region, counterexample_system};
use tds_spectrum::lambert_dde::{
    branch_scan, classify_pair, roots_to_companion, s_to_w, solve_branch, verify_solution, w_to_m, SolverOptions,
};
use tds_spectrum::matrix_fn::{eigenvalues, w_times_exp_w};
use tds_spectrum::{
    char_fn, count_roots, eig, expm, find_roots, lambert_w, matrix_lambert_w, BranchAssignment, BranchId,
    ComplexMatrix, GridSpec, Region, TdsSystem,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| c(re, im))
}

fn real2(range: f64) -> impl Strategy<Value = [[f64; 2]; 2]> {
    prop::array::uniform2(prop::array::uniform2(-range..range))
}

fn complex2(range: f64) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(range), 4).prop_map(|v| ComplexMatrix::new(2, v).unwrap())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn char_fn_conjugate_symmetry(a in real2(5.0), b in real2(5.0), tau in 0.1..3.0, s in complex(10.0)) {
        let sys = TdsSystem::from_real(&a, &b, tau).unwrap();
        let lhs = char_fn(&sys, s.conj());
        let rhs = char_fn(&sys, s).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn char_fn_matches_expansion(s in complex(10.0)) {
        let sys = counterexample_system();
        let want = s * s - 10.0 * s + 5.0 + 3.0 * (s + 1.0) * (-s).exp();
        let scale = (s * s).norm() + 10.0 * s.norm() + 5.0 + 3.0 * ((s + 1.0) * (-s).exp()).norm();
        prop_assert!((char_fn(&sys, s) - want).norm() <= 1e-12 * scale);
    }

    #[test]
    fn lambert_defining_identity(k in -5i64..=5, z in complex(50.0)) {
        prop_assume!(z.norm() > 1e-6);
        let w = lambert_w(BranchId(k), z).unwrap();
        prop_assert!(rel(w * w.exp(), z) <= 1e-13 * (1.0 + w.norm()), "k={} z={} w={}", k, z, w);
    }

    #[test]
    fn lambert_real_branches(x in -1.0 / E..0.0) {
        prop_assume!(x > -1.0 / E + 1e-12 && x < 0.0);
        let z = c(x, 0.0);
        let w0 = lambert_w(BranchId(0), z).unwrap();
        let wm = lambert_w(BranchId(-1), z).unwrap();
        prop_assert!(w0.im == 0.0 && w0.re > -1.0 && w0.re < 0.0);
        prop_assert!(wm.im == 0.0 && wm.re < -1.0);
    }

    #[test]
    fn lambert_conjugation(k in -5i64..=5, z in complex(50.0)) {
        prop_assume!(z.im.abs() > 1e-9);
        let a = lambert_w(BranchId(-k), z.conj()).unwrap();
        let b = lambert_w(BranchId(k), z).unwrap().conj();
        prop_assert!(rel(a, b) <= 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expm_additivity(m in complex2(2.0), a in -1.5..1.5, b in -1.5..1.5) {
        let lhs = expm(&m.scale_real(a + b)).unwrap();
        let rhs = &expm(&m.scale_real(a)).unwrap() * &expm(&m.scale_real(b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * lhs.max_abs().max(1.0));
    }
}

fn off_cut(l: Complex64) -> bool {
    !(l.re < 0.0 && l.im.abs() <= 1e-6 * l.norm().max(1e-300))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matrix_lambert_round_trip(m in complex2(3.0), ks in prop::array::uniform2(-2i64..=2)) {
        let e = eig(&m);
        prop_assume!(e.is_ok());
        let e = e.unwrap();
        prop_assume!(e.condition < 1e4 && e.values.iter().all(|&l| off_cut(l)));
        let ks: Vec<i64> = e.values.iter().zip(ks).map(|(l, k)| if l.norm() <= 1e-8 { 0 } else { k }).collect();
        let w = matrix_lambert_w(&BranchAssignment::from_ints(&ks), &m).unwrap();
        let back = w_times_exp_w(&w).unwrap();
        prop_assert!(back.max_abs_diff(&m) <= 1e-8 * m.max_abs().max(1.0));
    }

    #[test]
    fn matrix_lambert_similarity(m in complex2(3.0), p in complex2(2.0), k in -2i64..=2) {
        let e = eig(&m);
        prop_assume!(e.is_ok());
        let e = e.unwrap();
        prop_assume!(e.condition < 1e3 && e.values.iter().all(|&l| off_cut(l) && l.norm() > 1e-3));
        prop_assume!((e.values[0].re - e.values[1].re).abs() > 1e-6);
        let p_inv = p.inverse();
        prop_assume!(p_inv.is_ok());
        let p_inv = p_inv.unwrap();
        prop_assume!(p.norm_fro() * p_inv.norm_fro() < 20.0);
        let assign = BranchAssignment::from_ints(&[k, k]);
        let lhs = matrix_lambert_w(&assign, &(&(&p * &m) * &p_inv)).unwrap();
        let rhs = &(&p * &matrix_lambert_w(&assign, &m).unwrap()) * &p_inv;
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-8 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn w22_identity(a in real2(5.0), tau in 0.5..2.0, re in -5.0..5.0, im in 0.0..10.0) {
        let sys = TdsSystem::from_real(&a, &[[0.0, 0.0], [1.0, 1.0]], tau).unwrap();
        let l = c(re, im);
        let p = classify_pair(&sys, l, l.conj(), None);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        prop_assert!((p.w22 - tau * (2.0 * re - a[1][1])).abs() <= 1e-12 * (1.0 + p.w22.abs()));
    }

    #[test]
    fn scalar_solutions_verify(a in -2.0..2.0, b in prop_oneof![-2.0..-0.2, 0.2..2.0], tau in 0.5..2.0, k in -2i64..=2) {
        let sys = TdsSystem::scalar(a, b, tau).unwrap();
        let opts = SolverOptions::default();
        if let Ok(sol) = solve_branch(&sys, &BranchAssignment::from_ints(&[k]), &ComplexMatrix::identity(1), opts) {
            let v = verify_solution(&sys, &sol.s).unwrap();
            prop_assert!(v.matrix_residual <= 10.0 * opts.tol);
            prop_assert!(v.char_residuals.iter().all(|&r| r <= 10.0 * opts.tol));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn roots_are_conjugate_closed(a in real2(5.0), b in real2(5.0), tau in 0.5..2.0) {
        let sys = TdsSystem::from_real(&a, &b, tau).unwrap();
        let region = Region::new(-3.0, 3.0, -8.0, 8.0).unwrap();
        let rep = find_roots(&sys, &GridSpec::new(region, 0.05).unwrap(), 1e-10).unwrap();
        for &s in &rep.roots {
            prop_assert!(rep.roots.iter().any(|&t| (t - s.conj()).norm() <= 1e-9), "{} lacks its conjugate", s);
        }
    }

    #[test]
    fn refinement_keeps_roots(a in real2(5.0), b in real2(5.0), tau in 0.5..2.0) {
        let sys = TdsSystem::from_real(&a, &b, tau).unwrap();
        let region = Region::new(-3.0, 3.0, -1.0, 6.0).unwrap();
        let coarse = find_roots(&sys, &GridSpec::new(region, 0.1).unwrap(), 1e-10).unwrap();
        let fine = find_roots(&sys, &GridSpec::new(region, 0.05).unwrap(), 1e-10).unwrap();
        for &s in &coarse.roots {
            prop_assert!(fine.roots.iter().any(|&t| (t - s).norm() <= 0.1), "{} lost under refinement", s);
        }
    }

    #[test]
    fn oracle_agreement(a in real2(5.0), b in real2(5.0), tau in 0.5..2.0) {
        let sys = TdsSystem::from_real(&a, &b, tau).unwrap();
        let region = Region::new(-3.0, 3.0, -1.0, 10.0).unwrap();
        let rep = find_roots(&sys, &GridSpec::new(region, 0.05).unwrap(), 1e-10).unwrap();
        prop_assert!(rep.residuals.iter().all(|&r| r <= 1e-10));
        prop_assert_eq!(count_roots(&sys, &region, 400).unwrap(), rep.len());
    }
}

#[test]
fn delay_free_roots_are_eigenvalues_of_a() {
    let sys = counterexample_system().without_delay_term();
    let region = Region::new(0.0, 10.0, -1.0, 1.0).unwrap();
    let rep = find_roots(&sys, &GridSpec::new(region, 0.05).unwrap(), 1e-12).unwrap();
    let want = [5.0 + 20f64.sqrt(), 5.0 - 20f64.sqrt()];
    assert_eq!(rep.len(), 2);
    for (got, want) in rep.roots.iter().zip(want) {
        assert!((got - c(want, 0.0)).norm() < 1e-10);
    }
    assert!((want[1] - 0.5279).abs() < 5e-5 && (want[0] - 9.4721).abs() < 5e-5);
}

#[test]
fn pipeline_closes_for_every_pair() {
    let sys = counterexample_system();
    let grid = GridSpec::new(counterexample_region(), 0.05).unwrap();
    let rep = find_roots(&sys, &grid, 1e-10).unwrap();
    let scan = branch_scan(&sys, &rep).unwrap();
    assert!(!scan.pairs.is_empty());
    for p in &scan.pairs {
        let (l1, l2) = p.pair;
        let s = roots_to_companion(l1, l2).unwrap();
        let w = s_to_w(&sys, &s).unwrap();
        let m = w_to_m(&w).unwrap();
        let back = matrix_lambert_w(&BranchAssignment::from_ints(&[0, -1]), &m).unwrap();
        assert!(back.max_abs_diff(&w) <= 1e-6);
        let ev = eigenvalues(&s).unwrap();
        let matched = |z: Complex64| ev.iter().any(|&e| (e - z).norm() <= 1e-9);
        assert!(matched(l1) && matched(l2));
    }
}

#[test]
fn dominant_pair_is_not_principal() {
    let sys = counterexample_system();
    let grid = GridSpec::new(counterexample_region(), 0.05).unwrap();
    let rep = find_roots(&sys, &grid, 1e-10).unwrap();
    let scan = branch_scan(&sys, &rep).unwrap();
    let dominant = scan.pairs.iter().find(|p| p.includes_dominant).unwrap();
    assert_eq!(dominant.branch, BranchId(-1));
}
