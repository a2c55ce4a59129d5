use proptest::prelude::*;

use pathmetric::delta::build_metric_lp;
use pathmetric::linarith::lpformat::parse_lp;
use pathmetric::linarith::{feasible, fm_eliminate, isolate_roots, Interval, LinearSystem, ParamPoly};
use pathmetric::oracle::enumerate_consistent_systems;
use pathmetric::pathsystem::PathSystem;
use pathmetric::rational::{self, int, pow10_neg, ratio, Rational};

fn system(nvars: usize, rows: &[(Vec<i64>, i64)]) -> LinearSystem {
    let mut s = LinearSystem::new(nvars);
    for (c, b) in rows {
        let sparse: Vec<(usize, Rational)> = c.iter().enumerate().map(|(i, &v)| (i, int(v))).collect();
        s.push_sparse(&sparse, int(*b), "");
    }
    s
}

fn rows_strategy(nvars: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, nvars), -4i64..=4), 1..7)
}

fn k4_systems() -> &'static [PathSystem] {
    static S: std::sync::LazyLock<Vec<PathSystem>> =
        std::sync::LazyLock::new(|| enumerate_consistent_systems(4).unwrap().collect());
    &S
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn elimination_agrees_with_simplex(rows in rows_strategy(3)) {
        let s = system(3, &rows);
        let simplex = feasible(&s).unwrap();
        prop_assert!(simplex.verify(&s));
        let projected = fm_eliminate(&s, &[0, 1, 2]).unwrap();
        let contradiction = projected.rows().iter().any(|r| r.is_zero_row() && r.rhs < int(0));
        prop_assert_eq!(simplex.is_feasible(), !contradiction);
    }

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let r = ratio(p, q);
        prop_assert_eq!(rational::parse_rational(&rational::to_string(&r)).unwrap(), r);
    }

    #[test]
    fn lp_text_round_trip(rows in rows_strategy(4)) {
        let s = system(4, &rows);
        let back = parse_lp(&s.to_lp_text()).unwrap().instantiate(&int(1));
        // variables absent from every row are dropped on reparse
        let probe: Vec<Rational> = (0..4).map(|i| ratio(i as i64 * 3 - 4, 2)).collect();
        let names = back.var_names().to_vec();
        let x: Vec<Rational> = names.iter().map(|n| probe[n[1..].parse::<usize>().unwrap()].clone()).collect();
        let ok = |sys: &LinearSystem, x: &[Rational]| sys.first_violation(x).is_none();
        let mapped = probe.clone();
        prop_assert_eq!(ok(&s, &mapped), ok(&back, &x));
        prop_assert_eq!(feasible(&s).unwrap().is_feasible(), feasible(&back).unwrap().is_feasible());
    }

    #[test]
    fn isolated_roots_change_sign(coeffs in prop::collection::vec(-6i64..=6, 2..6)) {
        let p = ParamPoly::from_i64s(&coeffs);
        prop_assume!(p.degree().unwrap_or(0) >= 1);
        let range = Interval::closed(int(-8), int(8));
        let roots = isolate_roots(&p, &range, &pow10_neg(6));
        for w in roots.windows(2) {
            prop_assert!(w[0].hi <= w[1].lo);
        }
        for r in &roots {
            prop_assert!(&r.hi - &r.lo <= pow10_neg(6));
            if r.lo != r.hi {
                let (a, b) = (p.eval(&r.lo), p.eval(&r.hi));
                prop_assert!(a.clone() * b.clone() <= int(0), "no sign change on [{}, {}]", r.lo, r.hi);
            } else {
                prop_assert_eq!(p.eval(&r.lo), int(0));
            }
        }
    }

    #[test]
    fn feasibility_is_monotone_in_t(i in 0usize..53, a in 2i64..40, b in 2i64..40) {
        let ps = &k4_systems()[i];
        let (lo, hi) = (ratio(a.min(b), 10), ratio(a.max(b), 10));
        let at_lo = feasible(&build_metric_lp(ps, &lo).unwrap()).unwrap().is_feasible();
        let at_hi = feasible(&build_metric_lp(ps, &hi).unwrap()).unwrap().is_feasible();
        prop_assert!(!at_lo || at_hi);
    }
}
