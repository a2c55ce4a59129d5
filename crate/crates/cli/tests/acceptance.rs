//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed; exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::{Duration, Instant};

use pathmetric::delta::{
    build_invariant_metric_lp, build_metric_param_lp, delta_bisect, exact_threshold, is_metric, paley29_elimination_order,
    paley29_keep, paley29_reduced_subsystem, paley29_weights, verify_certificate, DeltaOptions, MetricCertificate, Target,
};
use pathmetric::groups::{build_from_words, cayley_construction, paley_system, petersen_system, sample_x};
use pathmetric::linarith::{feasible, fm_eliminate, isolate_roots, Feasibility, Interval, LinearSystem, ParamPoly};
use pathmetric::oracle::{enumerate_consistent_systems, random_weights, shortest_path_system};
use pathmetric::pathsystem::{validate_system, Graph};
use pathmetric::rational::{self, int, pow10_neg, ratio, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 9] = [
        ("petersen: non-metric with Δ = 1", secs(10), petersen),
        ("paley29: bisection bracket", secs(30), paley29_bracket),
        ("paley29: exact threshold", secs(10), paley29_exact),
        ("paley29: class weights certificate", secs(60), paley29_certificate),
        ("cayley(101, ±1 ±10, 9) lower bound", secs(60), cayley101),
        ("K3/K4: bisection contains exact threshold", secs(300), small_complete),
        ("K6 shortest-path systems are metric", secs(120), shortest_paths_k6),
        ("sampler on Z_10007", secs(120), sampler),
        ("monotonicity and FM agreement", secs(300), monotone_and_fm),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{took:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> Result<Value, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pathmetric").chain(args.iter().copied());
    let code = pathmetric_cli::execute_with(argv, &mut out, &mut err);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    serde_json::from_slice(&out).map_err(|e| format!("{args:?}: bad JSON: {e}"))
}

fn field(v: &Value, key: &str) -> Result<Rational, String> {
    let s = v.get(key).and_then(Value::as_str).ok_or(format!("missing {key}"))?;
    rational::parse_rational(s).map_err(|e| format!("{key}: {e}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("temp file");
    path.to_string_lossy().into_owned()
}

/// yᵀA = 0, yᵀb < 0, y ≥ 0, computed row by row.
fn farkas_holds(sys: &LinearSystem, y: &[Rational]) -> bool {
    if y.len() != sys.len() || y.iter().any(|v| v < &int(0)) {
        return false;
    }
    let mut combo = vec![int(0); sys.num_vars()];
    let mut rhs = int(0);
    for (row, yi) in sys.rows().iter().zip(y) {
        for (c, a) in combo.iter_mut().zip(&row.coeffs) {
            *c += yi * a;
        }
        rhs += yi * &row.rhs;
    }
    combo.iter().all(|c| c == &int(0)) && rhs < int(0)
}

fn cubic() -> ParamPoly {
    ParamPoly::from_i64s(&[12, -10, -3, 2])
}

fn cubic_f64(t: f64) -> f64 {
    ((2.0 * t - 3.0) * t - 10.0) * t + 12.0
}

/// Middle root of the cubic by plain f64 bisection on [1, 3/2], where it
/// changes sign from + to -.
fn middle_root_f64() -> f64 {
    let (mut lo, mut hi) = (1.0f64, 1.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cubic_f64(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact rational bisection for the middle root, to width `2^-bits`.
fn middle_root_rational(bits: u32) -> Rational {
    let eval = |t: &Rational| ((t * int(2) - int(3)) * t - int(10)) * t + int(12);
    let (mut lo, mut hi) = (int(1), ratio(3, 2));
    for _ in 0..bits {
        let mid = (&lo + &hi) / int(2);
        if eval(&mid) > int(0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn petersen() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = write(dir.path(), "petersen.json", &petersen_system().to_json());

    let m = cli(&["is-metric", &file])?;
    ensure(m["metric"] == Value::Bool(false), || format!("is-metric says {}", m["metric"]))?;
    let support = m["farkas"].as_array().map_or(0, Vec::len);
    ensure(support > 0, || "no Farkas rows emitted".into())?;
    let decision = is_metric(Target::Full(&petersen_system())).map_err(|e| e.to_string())?;
    let y = decision.farkas.ok_or("library gave no Farkas vector")?;
    let collinear = build_metric_param_lp(&petersen_system(), true).map_err(|e| e.to_string())?;
    ensure(farkas_holds(&collinear.at(&int(1)), &y), || "Farkas vector does not check".into())?;

    let cert = dir.path().join("cert.json").to_string_lossy().into_owned();
    let d = cli(&["delta", &file, "--tol", "1e-6", "--cert-out", &cert])?;
    let (lo, hi) = (field(&d, "lo")?, field(&d, "hi")?);
    ensure(lo == int(1), || format!("lo = {lo}"))?;
    ensure(hi <= int(1) + pow10_neg(6), || format!("hi = {hi}"))?;
    let v = cli(&["verify", &file, &cert])?;
    ensure(v["passed"] == Value::Bool(true), || "emitted certificate does not verify".into())?;
    Ok(format!(
        "{support} Farkas rows; bracket [{}, {}]",
        rational::to_decimal(&lo, 9),
        rational::to_decimal(&hi, 9)
    ))
}

fn paley29_bracket() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let wt = paley_system(29).map_err(|e| e.to_string())?;
    let file = write(dir.path(), "paley29.json", &wt.to_json());
    let d = cli(&["delta", "--invariant", &file, "--tol", "1e-8"])?;
    let (lo, hi) = (field(&d, "lo")?, field(&d, "hi")?);
    let mid = rational::to_f64(&((&lo + &hi) / int(2)));
    let residual = cubic_f64(mid).abs();
    let text = format!(
        "bracket [{}, {}], |f(mid)| = {residual:.2e}",
        rational::to_decimal(&lo, 10),
        rational::to_decimal(&hi, 10)
    );
    ensure(hi.clone() - lo.clone() <= pow10_neg(8), || format!("{text}; wider than 1e-8"))?;
    ensure(lo >= ratio(11030, 10000) && hi <= ratio(11032, 10000), || {
        format!("{text}; not inside [1.1030, 1.1032]")
    })?;
    ensure(residual <= 1e-6, || format!("{text}; residual above 1e-6"))?;
    Ok(text)
}

fn paley29_exact() -> Check {
    let sys = paley29_reduced_subsystem(Interval::closed(int(1), int(2)));
    let th = exact_threshold(&sys, Some(&paley29_elimination_order()), paley29_keep()).map_err(|e| e.to_string())?;
    let iv = &th.interval;
    let f = cubic();
    ensure(f.sign_at(&iv.lo) != f.sign_at(&iv.hi), || format!("cubic has no sign change on {iv}"))?;
    let root = middle_root_f64();
    let (lo, hi) = (rational::to_f64(&iv.lo), rational::to_f64(&iv.hi));
    ensure(lo - 1e-12 <= root && root <= hi + 1e-12, || format!("{iv} misses the middle root {root}"))?;
    let all = isolate_roots(&f, &Interval::closed(int(-10), int(10)), &pow10_neg(6));
    ensure(all.len() == 3 && all[1].lo <= iv.hi && iv.lo <= all[1].hi, || "not the middle root".into())?;

    let target = (&ParamPoly::from_i64s(&[2, 1]) * &f).primitive();
    let keep = paley29_keep();
    let hit = th.cells.iter().flat_map(|c| &c.terminal).find(|r| {
        let p = &r.coeffs[keep];
        !p.is_zero() && p.primitive() == target
    });
    let row = hit.ok_or_else(|| format!("no terminal coefficient equals {target} up to content"))?;
    Ok(format!(
        "root in [{}, {}] (width {}), polynomial {}; terminal row ({})·w9 <= {}",
        rational::to_decimal(&iv.lo, 15),
        rational::to_decimal(&iv.hi, 15),
        rational::to_decimal(&iv.width(), 18),
        th.polynomial,
        row.coeffs[keep],
        row.rhs
    ))
}

fn paley29_certificate() -> Check {
    let r_hat = middle_root_rational(60);
    let gap = rational::to_f64(&r_hat) - middle_root_f64();
    let gap = rational::from_f64(gap.abs()).ok_or("nan")?;
    ensure(gap <= pow10_neg(12), || format!("r̂ disagrees with the f64 root by {gap}"))?;
    let weights = paley29_weights(&r_hat);
    ensure(weights.len() == 14, || format!("{} weights", weights.len()))?;
    let t = &r_hat + pow10_neg(9);
    let cert = MetricCertificate::class(t, weights).map_err(|e| e.to_string())?;
    let wt = paley_system(29).map_err(|e| e.to_string())?;
    let report = verify_certificate(Target::Invariant(&wt), &cert).map_err(|e| e.to_string())?;
    ensure(report.passed && report.violation_count == 0, || {
        format!("{} violations, first {:?}", report.violation_count, report.violations.first())
    })?;
    Ok(format!(
        "{} triangle and {} stretch checks at r̂ + 1e-9; max stretch {}",
        report.triangle_checks,
        report.stretch_checks,
        rational::to_decimal(&report.max_stretch, 12)
    ))
}

/// Plain BFS diameter of the Cayley graph of `Z_n` with generators `x`.
fn bfs_diameter(n: usize, x: &[usize]) -> Option<usize> {
    let mut dist = vec![usize::MAX; n];
    dist[0] = 0;
    let mut q = VecDeque::from([0]);
    while let Some(v) = q.pop_front() {
        for &g in x {
            let w = (v + g) % n;
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    dist.iter().all(|&d| d != usize::MAX).then(|| *dist.iter().max().unwrap())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Forbidden pairs `i·a = j·b`, `a ≠ ±b`, `1 <= |i|, |j| <= m`, by brute force.
fn forbidden_pairs(n: usize, x: &[usize], m: usize) -> usize {
    let mut count = 0;
    for (ia, &a) in x.iter().enumerate() {
        for &b in &x[ia + 1..] {
            if b == (n - a) % n {
                continue;
            }
            let mut found = false;
            for i in 1..=m {
                for j in 1..=m {
                    let ai = i * a % n;
                    let bj = j * b % n;
                    if ai == bj || ai == (n - bj) % n {
                        found = true;
                    }
                }
            }
            count += found as usize;
        }
    }
    count
}

fn cayley101() -> Check {
    let x = [1, -1, 10, -10];
    let (params, wt) = cayley_construction(101, &x, 9).map_err(|e| e.to_string())?;
    let xs: Vec<usize> = x.iter().map(|&a| (a + 101) as usize % 101).collect();
    ensure(xs.iter().all(|&a| 101 / gcd(101, a) > 18), || "element of order <= 2m".into())?;
    ensure(forbidden_pairs(101, &xs, 9) == 0, || "forbidden pair present".into())?;
    // d from BFS distances of m·g
    let mut d = 0;
    for &a in &xs {
        let dist = bfs_distance_to(101, &xs, 9 * a % 101).ok_or("unreachable")?;
        d = d.max(dist);
    }
    ensure(d == 2 && params.d == 2, || format!("d = {} (BFS oracle {d})", params.d))?;
    ensure(params.bound == ratio(9, 8), || format!("bound = {}", params.bound))?;
    let full = build_from_words(&wt).map_err(|e| e.to_string())?;
    let report = validate_system(&full, None);
    ensure(report.consistent, || format!("expanded system inconsistent: {:?}", report.violations.first()))?;
    let t = ratio(9, 8) - pow10_neg(6);
    let lp = build_invariant_metric_lp(&wt, &t).map_err(|e| e.to_string())?;
    let y = match feasible(&lp).map_err(|e| e.to_string())? {
        Feasibility::Infeasible(y) => y,
        Feasibility::Feasible(_) => return Err("reduced LP feasible at 9/8 - 1e-6".into()),
    };
    ensure(farkas_holds(&lp, &y), || "Farkas vector does not check".into())?;
    let support = y.iter().filter(|v| **v != int(0)).count();
    Ok(format!("d = 2, bound 9/8, consistent; infeasible at 9/8 - 1e-6 ({support} Farkas rows)"))
}

fn bfs_distance_to(n: usize, x: &[usize], target: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; n];
    dist[0] = 0;
    let mut q = VecDeque::from([0]);
    while let Some(v) = q.pop_front() {
        if v == target {
            return Some(dist[v]);
        }
        for &g in x {
            let w = (v + g) % n;
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    None
}

fn small_complete() -> Check {
    let mut counts = BTreeMap::new();
    for n in [3, 4] {
        let systems: Vec<_> = enumerate_consistent_systems(n).map_err(|e| e.to_string())?.collect();
        let again: Vec<_> = enumerate_consistent_systems(n).map_err(|e| e.to_string())?.collect();
        ensure(systems == again, || format!("K{n} enumeration not reproducible"))?;
        for ps in &systems {
            let lp = build_metric_param_lp(ps, false).map_err(|e| e.to_string())?;
            let opts = DeltaOptions::default();
            let r = delta_bisect(Target::Full(ps), &opts).map_err(|e| e.to_string())?;
            let th = exact_threshold(&lp.system, None, 0).map_err(|e| e.to_string())?;
            ensure(r.lo <= th.interval.lo && th.interval.hi <= r.hi, || {
                format!("K{n}: bracket [{}, {}] misses {}", r.lo, r.hi, th.interval)
            })?;
        }
        counts.insert(n, systems.len());
    }
    ensure(counts[&3] == 4, || format!("K3 has {} systems", counts[&3]))?;
    Ok(format!("K3: {} systems, K4: {} systems, all brackets contain the exact threshold", counts[&3], counts[&4]))
}

fn shortest_paths_k6() -> Check {
    let g = Graph::complete(6);
    let mut worst = int(1);
    for seed in 0..20 {
        let w = random_weights(&g, seed);
        let (ps, _) = shortest_path_system(&g, &w).map_err(|e| format!("seed {seed}: {e}"))?;
        let m = is_metric(Target::Full(&ps)).map_err(|e| e.to_string())?;
        ensure(m.metric, || format!("seed {seed}: not metric"))?;
        let r = delta_bisect(Target::Full(&ps), &DeltaOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.hi <= int(1) + pow10_neg(6), || format!("seed {seed}: hi = {}", r.hi))?;
        if r.hi > worst {
            worst = r.hi;
        }
    }
    Ok(format!("20 seeds metric; largest hi {}", rational::to_decimal(&worst, 9)))
}

fn sampler() -> Check {
    let (n, k, m) = (10007, 12, 5);
    let mut ok = 0;
    let mut diameters = Vec::new();
    for seed in 0..10 {
        let Ok(s) = sample_x(n, k, m, seed, 20) else {
            continue;
        };
        ok += 1;
        let classes: BTreeSet<usize> = s.x.iter().map(|&a| a.min(n - a)).collect();
        ensure(classes.len() == k && s.x.len() == 2 * k, || format!("seed {seed}: |X| = {}", s.x.len()))?;
        ensure(s.x.iter().all(|&a| a != 0 && n / gcd(n, a) > 2 * m), || format!("seed {seed}: low order"))?;
        ensure(forbidden_pairs(n, &s.x, m) == 0, || format!("seed {seed}: forbidden pair"))?;
        let d = bfs_diameter(n, &s.x).ok_or(format!("seed {seed}: disconnected"))?;
        ensure(s.diameter == Some(d), || format!("seed {seed}: reported {:?}, BFS {d}", s.diameter))?;
        ensure(d <= 12, || format!("seed {seed}: diameter {d}"))?;
        diameters.push(d);
    }
    ensure(ok >= 8, || format!("only {ok}/10 seeds succeeded"))?;
    Ok(format!("{ok}/10 seeds accepted, diameters {diameters:?}"))
}

fn monotone_and_fm() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut pool = vec![Target::Full(&PETERSEN)];
    let paley = [29, 53, 101]
        .iter()
        .map(|&p| paley_system(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let (_, c101) = cayley_construction(101, &[1, -1, 10, -10], 9).map_err(|e| e.to_string())?;
    let k4: Vec<_> = enumerate_consistent_systems(4).map_err(|e| e.to_string())?.collect();
    pool.extend(paley.iter().map(Target::Invariant));
    pool.push(Target::Invariant(&c101));
    pool.extend(k4.iter().map(Target::Full));

    let mut flips = 0;
    for probe in 0..50 {
        // every other probe on a system with Δ > 1 or Δ unattained
        let target = if probe % 2 == 0 { pool[rng.gen_range(0..5)] } else { pool[rng.gen_range(0..pool.len())] };
        let lp = target.metric_lp().map_err(|e| e.to_string())?;
        // t in [1, 1.3] with 1e-4 resolution, where the interesting thresholds sit
        let mut a = if rng.gen_bool(0.25) { 0 } else { rng.gen_range(0..=3000i64) };
        let mut b = rng.gen_range(0..=3000i64);
        if a == b {
            b += 1;
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let t0 = int(1) + ratio(a, 10000);
        let t1 = int(1) + ratio(b, 10000);
        let f0 = feasible(&lp.at(&t0)).map_err(|e| e.to_string())?;
        let f1 = feasible(&lp.at(&t1)).map_err(|e| e.to_string())?;
        ensure(f0.verify(&lp.at(&t0)) && f1.verify(&lp.at(&t1)), || format!("probe {probe}: witness fails"))?;
        ensure(!f0.is_feasible() || f1.is_feasible(), || format!("probe {probe}: feasible at {t0}, not at {t1}"))?;
        flips += (f0.is_feasible() != f1.is_feasible()) as usize;
    }

    let mut infeasible = 0;
    for case in 0..200 {
        let nv = rng.gen_range(1..=5);
        let rows = rng.gen_range(2..=9);
        let mut sys = LinearSystem::new(nv);
        for _ in 0..rows {
            let terms: Vec<(usize, Rational)> = (0..nv).map(|v| (v, int(rng.gen_range(-3..=3)))).collect();
            sys.push_sparse(&terms, int(rng.gen_range(-4..=6)), "");
        }
        let order: Vec<usize> = (0..nv).collect();
        let projected = fm_eliminate(&sys, &order).map_err(|e| e.to_string())?;
        let fm_says = projected.rows().iter().all(|r| r.rhs >= int(0));
        let simplex = feasible(&sys).map_err(|e| e.to_string())?;
        ensure(simplex.verify(&sys), || format!("case {case}: simplex witness fails"))?;
        ensure(fm_says == simplex.is_feasible(), || format!("case {case}: FM {fm_says}, simplex {}", simplex.is_feasible()))?;
        infeasible += (!fm_says) as usize;
    }
    Ok(format!(
        "50 probes monotone ({flips} straddle a threshold); 200 FM/simplex agreements ({infeasible} infeasible)"
    ))
}

static PETERSEN: std::sync::LazyLock<pathmetric::pathsystem::PathSystem> = std::sync::LazyLock::new(petersen_system);
