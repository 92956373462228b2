use nilheat::algebra::{make_free_nilpotent, make_random_hs, LieAlgebra};
use nilheat::bchd::inverse;
use nilheat::combinatorics::{f_alpha, permutations, strichartz_coefficient, AlphaIndex};
use nilheat::experiments::{c_function, harnack_exponent, harnack_exponent_alt, logsob_factor};
use nilheat::geometry::ricci_lower_bound;
use nilheat::stochastic::{sample_path, BmFormula, EulerScheme};
use nilheat::BchdLaw;
use num_rational::Rational64;
use num_traits::Zero;
use proptest::prelude::*;

fn random_algebra() -> impl Strategy<Value = LieAlgebra> {
    (1usize..4)
        .prop_flat_map(|r| (r + 1..9, Just(r), 0u64..1000, 0.5f64..2.0))
        .prop_map(|(d, r, seed, gamma)| make_random_hs(d.max(2), r, gamma, seed).unwrap())
}

fn vec_of(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-2.0f64..2.0, dim)
}

fn algebra_with_points(n: usize) -> impl Strategy<Value = (LieAlgebra, Vec<Vec<f64>>)> {
    random_algebra().prop_flat_map(move |alg| {
        let d = alg.dim();
        (Just(alg), proptest::collection::vec(vec_of(d), n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn random_algebras_validate(alg in random_algebra()) {
        let diag = alg.validate();
        prop_assert!(diag.pass);
        prop_assert!(diag.detected_step.unwrap() <= alg.step());
        for l in 1..=alg.dim() {
            prop_assert!(alg.leading_quotient(l).unwrap().validate().pass);
        }
    }

    #[test]
    fn group_axioms((alg, pts) in algebra_with_points(3)) {
        let law = BchdLaw::for_algebra(&alg).unwrap();
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        let e = alg.zero();
        prop_assert_eq!(law.multiply(&alg, x, &e).unwrap(), x.clone());
        prop_assert_eq!(law.multiply(&alg, &e, x).unwrap(), x.clone());
        let xi = law.multiply(&alg, x, &inverse(x)).unwrap();
        prop_assert!(xi.iter().all(|v| v.abs() < 1e-12));
        let l = law.multiply(&alg, &law.multiply(&alg, x, y).unwrap(), z).unwrap();
        let r = law.multiply(&alg, x, &law.multiply(&alg, y, z).unwrap()).unwrap();
        for (a, b) in l.iter().zip(&r) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
        // One-parameter subgroups commute.
        let sx: Vec<f64> = x.iter().map(|v| 0.3 * v).collect();
        let p = law.multiply(&alg, &sx, x).unwrap();
        for (a, b) in p.iter().zip(x) {
            prop_assert!((a - 1.3 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_chain(alg in random_algebra(), seed in 0u64..100) {
        let report = ricci_lower_bound(&alg, 5, seed).unwrap();
        prop_assert!(report.chain_holds(1e-10));
        prop_assert!(report.eigen_residual < 1e-10);
    }

    #[test]
    fn save_load_round_trip(alg in random_algebra()) {
        let back = LieAlgebra::from_json(&alg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.triplets(), alg.triplets());
        prop_assert_eq!(back.step(), alg.step());
    }

    #[test]
    fn step_two_formula_is_euler(d in 3usize..8, seed in 0u64..1000, steps in 1usize..40) {
        let alg = make_random_hs(d, 2, 1.0, seed).unwrap();
        let path = sample_path(d, 0.7, steps, seed).unwrap();
        let a = BmFormula::new(&alg).unwrap().evaluate(&path).unwrap();
        let b = EulerScheme::new(&alg).unwrap().evaluate(&path).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dyadic_coarsening(seed in 0u64..10_000, k in 0u32..6) {
        let fine = sample_path(3, 1.0, 2 << k, seed).unwrap();
        let coarse = sample_path(3, 1.0, 1 << k, seed).unwrap();
        let c = fine.coarsen().unwrap();
        for (a, b) in c.increments().iter().zip(coarse.increments()) {
            prop_assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn c_function_identities(x in -30.0f64..30.0, t in 0.01f64..5.0, k in -3.0f64..3.0) {
        prop_assert!((c_function(-x) - x.exp() * c_function(x)).abs() <= 1e-12 * c_function(-x));
        prop_assert!(c_function(x) > 0.0);
        let a = harnack_exponent(k, t, 2.0);
        let b = harnack_exponent_alt(k, t, 2.0);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs());
        prop_assert!(logsob_factor(k, t) > 0.0);
    }

    #[test]
    fn f_alpha_recomposes(bits in proptest::collection::vec(1u8..=2, 1..7)) {
        let f = f_alpha(&AlphaIndex::new(bits).unwrap());
        prop_assert_eq!(f.recompose(), f.poly);
    }
}

#[test]
fn coefficient_sums() {
    // Reversal maps e(σ) to n − 1 − e(σ), so the coefficients differ by (−1)^{n−1}
    // and cancel in pairs for even n.
    for n in 2..=6 {
        let mut total = Rational64::zero();
        for sigma in permutations(n) {
            let c = strichartz_coefficient(&sigma).unwrap();
            let rev: Vec<usize> = sigma.iter().rev().copied().collect();
            let r = strichartz_coefficient(&rev).unwrap();
            let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
            assert_eq!(r, c * Rational64::from_integer(sign));
            total += c;
        }
        if n % 2 == 0 {
            assert_eq!(total, Rational64::zero());
        }
    }
}

#[test]
fn free_nilpotent_quotients_are_free() {
    // The degree-≤2 leading block of the free step-3 algebra is the free step-2 algebra.
    let big = make_free_nilpotent(2, 3).unwrap();
    let small = make_free_nilpotent(2, 2).unwrap();
    let q = big.leading_quotient(small.dim()).unwrap();
    assert_eq!(q.triplets(), small.triplets());
}
