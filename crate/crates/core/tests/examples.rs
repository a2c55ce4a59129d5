//! Worked examples across modules, checked end to end.

use pathmetric::delta::{
    build_invariant_metric_lp, build_metric_lp, expand_class_weights, is_metric, paley29_reduced_subsystem,
    paley29_weights, verify_certificate, MetricCertificate, Target,
};
use pathmetric::groups::{
    bfs_distance, build_from_words, cayley_construction, paley_system, petersen_system, sample_x, GroupError, WordTable,
};
use pathmetric::linarith::{
    feasible, fm_eliminate, isolate_roots, parametric_eliminate, Feasibility, Interval, LinearSystem, ParamPoly,
    ParamSystem,
};
use pathmetric::oracle::{enumerate_consistent_systems, naive_stretch, random_weights, shortest_path_system, OracleError};
use pathmetric::pathsystem::{path_cost, subpath, validate_system, Graph, Pair, PairWeights, Path, PathSystem};
use pathmetric::rational::{self, int, pow10_neg, ratio, Rational};

fn path(v: &[usize]) -> Path {
    Path::new(v.to_vec()).unwrap()
}

/// Middle root of 2t³-3t²-10t+12 by exact bisection on [1, 3/2].
fn r_hat() -> Rational {
    let f = |t: &Rational| ((t * int(2) - int(3)) * t - int(10)) * t + int(12);
    let (mut lo, mut hi) = (int(1), ratio(3, 2));
    for _ in 0..64 {
        let mid = (&lo + &hi) / int(2);
        if f(&mid) > int(0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn subpaths() {
    assert_eq!(subpath(&path(&[2, 1, 6, 8]), 1, 8).unwrap(), path(&[1, 6, 8]));
    assert_eq!(subpath(&path(&[0, 1, 2, 3]), 3, 1).unwrap(), path(&[3, 2, 1]));
    assert_eq!(subpath(&path(&[0, 1, 2, 3]), 2, 2).unwrap(), path(&[2]));
    assert!(subpath(&path(&[0, 1]), 0, 5).is_err());
}

#[test]
fn consistency_examples() {
    let r = validate_system(&petersen_system(), None);
    assert!(r.consistent && r.neighborly);

    let bad = PathSystem::from_paths(3, [path(&[0, 1, 2]), path(&[0, 2, 1]), path(&[1, 2])]).unwrap();
    let r = validate_system(&bad, None);
    assert!(!r.consistent);
    assert!(r.violations.iter().any(|v| v.pairs.contains(&(0, 1))));

    let g = Graph::path_graph(5);
    let (ps, _) = shortest_path_system(&g, &PairWeights::uniform(5, int(1))).unwrap();
    let r = validate_system(&ps, Some(&g));
    assert!(r.consistent && r.neighborly);
    assert_eq!(ps.path(0, 4).unwrap(), &path(&[0, 1, 2, 3, 4]));
}

#[test]
fn petersen_paths() {
    // vertices shifted down by one from the 1-based figure labels
    let ps = petersen_system();
    assert_eq!(ps.oriented(1, 7).unwrap(), path(&[1, 0, 5, 7]));
    assert_eq!(ps.path(0, 2).unwrap(), &path(&[0, 1, 2]));
    let unit = PairWeights::uniform(10, int(1));
    assert_eq!(naive_stretch(&ps, &unit).unwrap(), int(3));
    let report = verify_certificate(Target::Full(&ps), &MetricCertificate::full(int(1), unit)).unwrap();
    assert!(!report.passed);
    assert_eq!(report.max_stretch, int(3));
}

#[test]
fn costs() {
    let unit = PairWeights::uniform(4, int(1));
    assert_eq!(path_cost(&path(&[0, 1, 2, 3]), &unit).unwrap(), int(3));
    assert_eq!(path_cost(&path(&[2]), &unit).unwrap(), int(0));

    let r = r_hat();
    let w = expand_class_weights(29, &paley29_weights(&r)).unwrap();
    let c = path_cost(&path(&[0, 1, 2, 3]), &w).unwrap();
    assert_eq!(c, &r * &r * int(3));
    assert!((rational::to_f64(&c) - 3.6527).abs() < 1e-3);
}

#[test]
fn feasibility_examples() {
    let mut s = LinearSystem::new(1);
    s.push_sparse(&[(0, int(1))], int(0), "");
    s.push_sparse(&[(0, int(-1))], int(-1), "");
    match feasible(&s).unwrap() {
        Feasibility::Infeasible(y) => {
            assert_eq!(y[0], y[1]);
            assert!(y[0] > int(0));
        }
        other => panic!("{other:?}"),
    }
    let projected = fm_eliminate(&s, &[0]).unwrap();
    assert!(projected.rows().iter().any(|r| r.is_zero_row() && r.rhs < int(0)));

    let mut s = LinearSystem::new(2);
    s.push_sparse(&[(0, int(1)), (1, int(1))], int(1), "");
    s.push_sparse(&[(0, int(-1))], int(0), "");
    s.push_sparse(&[(1, int(-1))], int(0), "");
    assert!(feasible(&s).unwrap().verify(&s));

    // x, y: y <= 3, y >= 1, x <= y
    let mut s = LinearSystem::new(2);
    s.push_sparse(&[(1, int(1))], int(3), "");
    s.push_sparse(&[(1, int(-1))], int(-1), "");
    s.push_sparse(&[(0, int(1)), (1, int(-1))], int(0), "");
    let p = fm_eliminate(&s, &[1]).unwrap();
    assert_eq!(p.len(), 1);
    assert_eq!(p.rows()[0].coeffs, vec![int(1), int(0)]);
    assert_eq!(p.rows()[0].rhs, int(3));
}

#[test]
fn reduced_subsystem_sides() {
    let sys = paley29_reduced_subsystem(Interval::closed(int(1), int(2)));
    let with_floor = |t: &Rational| {
        let mut s = sys.instantiate(t);
        for v in 0..s.num_vars() {
            s.push_sparse(&[(v, int(-1))], int(-1), "floor");
        }
        s
    };
    assert!(!feasible(&with_floor(&int(1))).unwrap().is_feasible());
    assert!(feasible(&with_floor(&int(2))).unwrap().is_feasible());
}

#[test]
fn parametric_examples() {
    let mut sys = ParamSystem::new(vec!["x".into()], Interval::left_open(int(0), int(2))).unwrap();
    sys.push_sparse(&[(0, ParamPoly::t())], ParamPoly::constant(1), "");
    sys.push_sparse(&[(0, ParamPoly::constant(-1))], ParamPoly::constant(-1), "");
    let cells = parametric_eliminate(&sys, &[0]).unwrap();
    assert_eq!(cells.len(), 1);
    // 0 <= 1 - t
    let cond: ParamPoly = "1-t".parse().unwrap();
    assert!(cells[0].terminal.iter().any(|r| r.rhs == cond), "{:?}", cells[0].terminal);

    let mut sys = ParamSystem::new(vec!["x".into()], Interval::open(ratio(1, 2), int(2))).unwrap();
    sys.push_sparse(&[(0, "t-1".parse().unwrap())], ParamPoly::constant(1), "");
    sys.push_sparse(&[(0, ParamPoly::constant(-1))], ParamPoly::constant(-1), "");
    let cells = parametric_eliminate(&sys, &[0]).unwrap();
    assert!(cells.len() >= 2);
    let below = cells.iter().find(|c| c.interval.contains(&ratio(3, 4))).unwrap();
    let above = cells.iter().find(|c| c.interval.contains(&ratio(3, 2))).unwrap();
    assert_ne!(below.terminal, above.terminal);
}

#[test]
fn root_isolation_examples() {
    let cubic = ParamPoly::from_i64s(&[12, -10, -3, 2]);
    let roots = isolate_roots(&cubic, &Interval::closed(int(1), ratio(6, 5)), &pow10_neg(10));
    assert_eq!(roots.len(), 1);
    assert!((rational::to_f64(&roots[0].lo) - 1.1034306692638).abs() < 1e-9);
    let roots = isolate_roots(&ParamPoly::from_i64s(&[-2, 0, 1]), &Interval::closed(int(1), int(2)), &pow10_neg(6));
    assert_eq!(roots.len(), 1);
    assert!((rational::to_f64(&roots[0].lo) - std::f64::consts::SQRT_2).abs() < 1e-6);
    let none = isolate_roots(&ParamPoly::from_i64s(&[2, 1]), &Interval::closed(int(1), ratio(6, 5)), &pow10_neg(6));
    assert!(none.is_empty());
}

#[test]
fn lp_sizes() {
    let lp = build_metric_lp(&petersen_system(), &int(1)).unwrap();
    assert_eq!(lp.num_vars(), 45);
    assert_eq!(lp.len(), 360 + 45 + 30);

    let k2 = PathSystem::from_paths(2, [path(&[0, 1])]).unwrap();
    let lp = build_metric_lp(&k2, &int(1)).unwrap();
    assert_eq!(lp.num_vars(), 1);
    assert!(feasible(&lp).unwrap().is_feasible());
    assert!(is_metric(Target::Full(&k2)).unwrap().metric);

    let lp = build_invariant_metric_lp(&paley_system(29).unwrap(), &int(2)).unwrap();
    assert_eq!(lp.num_vars(), 14);
    let z5 = WordTable::new(5, [(1, vec![1]), (2, vec![1, 1]), (3, vec![-1, -1]), (4, vec![-1])]).unwrap();
    let lp = build_invariant_metric_lp(&z5, &int(2)).unwrap();
    assert_eq!(lp.num_vars(), 2);
}

#[test]
fn all_ones_at_t_equals_n() {
    for ps in enumerate_consistent_systems(4).unwrap() {
        let lp = build_metric_lp(&ps, &int(4)).unwrap();
        let ones = vec![int(1); lp.num_vars()];
        assert_eq!(lp.first_violation(&ones), None);
    }
    let ps = petersen_system();
    let lp = build_metric_lp(&ps, &int(10)).unwrap();
    assert_eq!(lp.first_violation(&vec![int(1); 45]), None);
}

#[test]
fn word_tables() {
    let z5 = WordTable::new(5, [(1, vec![1]), (2, vec![1, 1]), (3, vec![-1, -1]), (4, vec![-1])]).unwrap();
    let ps = build_from_words(&z5).unwrap();
    let (cycle, _) = shortest_path_system(&Graph::cycle(5), &PairWeights::uniform(5, int(1))).unwrap();
    for (pair, p) in cycle.iter() {
        assert_eq!(ps.path(pair.lo(), pair.hi()), Some(p));
    }

    let bad_sub = WordTable::new(5, [(1, vec![2, -1]), (2, vec![1, 1]), (3, vec![-1, -1]), (4, vec![1, -2])])
        .and_then(|wt| build_from_words(&wt).map(|_| ()));
    assert!(matches!(bad_sub, Err(GroupError::WordClosureViolation { .. })), "{bad_sub:?}");
    let bad_inv = WordTable::new(5, [(1, vec![1]), (2, vec![1, 1]), (3, vec![-1, -1]), (4, vec![2, 2])])
        .and_then(|wt| build_from_words(&wt).map(|_| ()));
    assert!(matches!(bad_inv, Err(GroupError::WordClosureViolation { .. })), "{bad_inv:?}");

    let p29 = paley_system(29).unwrap();
    assert_eq!(p29.word(1).unwrap(), &[1]);
    assert_eq!(p29.word(2).unwrap(), &[1, 1]);
    assert_eq!(p29.word(3).unwrap(), &[1, 1, 1]);
    assert!(matches!(paley_system(13), Err(GroupError::InvalidPrime { .. })));
}

#[test]
fn cayley_examples() {
    let x = pathmetric::groups::symmetric_set(101, &[1, 10]);
    assert_eq!(bfs_distance(101, &x, 0), Some(0));
    assert_eq!(bfs_distance(101, &x, 90), Some(2));
    assert_eq!(bfs_distance(101, &x, 9), Some(2));
    let (params, wt) = cayley_construction(101, &[1, -1, 10, -10], 9).unwrap();
    assert_eq!((params.d, params.bound.clone()), (2, ratio(9, 8)));
    assert!(validate_system(&build_from_words(&wt).unwrap(), None).consistent);
    assert!(matches!(
        cayley_construction(12, &[3, -3], 3),
        Err(GroupError::ConditionOrder { order: 4, .. })
    ));
    match cayley_construction(101, &[1, -1, 2, -2], 3) {
        Err(GroupError::ConditionCollision { g, i, h, j }) => assert_eq!((g * i) % 101, (h * j) % 101),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sampler_examples() {
    let s = sample_x(10007, 12, 5, 1, 50).unwrap();
    assert!(s.diameter.unwrap() <= 12);
    assert_eq!(sample_x(10007, 12, 5, 1, 50).unwrap(), s);
    assert!(matches!(sample_x(31, 12, 5, 1, 5), Err(GroupError::SamplingExhausted { attempts: 5 })));
}

#[test]
fn oracle_examples() {
    assert_eq!(enumerate_consistent_systems(2).unwrap().count(), 1);
    assert_eq!(enumerate_consistent_systems(3).unwrap().count(), 4);
    assert_eq!(enumerate_consistent_systems(4).unwrap().count(), 53);

    match shortest_path_system(&Graph::cycle(4), &PairWeights::uniform(4, int(1))) {
        Err(OracleError::AmbiguousShortestPath(p)) => assert!(p == Pair::new(0, 2) || p == Pair::new(1, 3)),
        other => panic!("{other:?}"),
    }

    let g = Graph::complete(5);
    let (seed, (ps, dist)) =
        (0..50).find_map(|seed| shortest_path_system(&g, &random_weights(&g, seed)).ok().map(|r| (seed, r))).unwrap();
    assert!(validate_system(&ps, Some(&g)).consistent);
    assert!(is_metric(Target::Full(&ps)).unwrap().metric);
    assert_eq!(naive_stretch(&ps, &dist.to_pair_weights()).unwrap(), int(1));
    let (again, _) = shortest_path_system(&g, &random_weights(&g, seed)).unwrap();
    assert_eq!(again.to_json(), ps.to_json());
}

#[test]
fn paley29_weights_stretch() {
    let r = r_hat();
    let wt = paley_system(29).unwrap();
    let full = build_from_words(&wt).unwrap();
    let w = expand_class_weights(29, &paley29_weights(&r)).unwrap();
    let s = naive_stretch(&full, &w).unwrap();
    assert!(s <= &r + pow10_neg(9), "{}", rational::to_decimal(&s, 15));
}
