//! α-metricity of path systems.
//!
//! A system `P` is α-metric when some metric `ρ` satisfies
//! `ρ(u,v) <= ρ(P_{u,v}) <= α·ρ(u,v)` for every pair. For fixed `t` this is
//! the feasibility of a linear system in the pair distances; [`delta_bisect`]
//! brackets the infimum `Δ(P)` of feasible `t`, and [`exact_threshold`]
//! recovers it as an algebraic number for small systems.

mod cert;
mod paley29;
mod threshold;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::groups::{GroupError, WordTable};
use crate::linarith::{
    feasible_f64, feasible_from, feasible_with, Feasibility, FeasibilityOptions, FloatFeasibility, Interval, LinError,
    LinearSystem, ParamPoly, ParamSystem,
};
use crate::pathsystem::{validate_system, Pair, PathError, PathSystem};
use crate::rational::{self, Rational};

pub use cert::{
    expand_class_weights, verify_certificate, CertKind, CertViolation, CertViolationKind, CertWeights,
    MetricCertificate, VerificationReport, MAX_REPORTED,
};
pub use paley29::{paley29_elimination_order, paley29_keep, paley29_reduced_subsystem, paley29_weights};
pub use threshold::{exact_threshold, exact_threshold_with, AlgebraicThreshold, ThresholdOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeltaError {
    #[error("path system is not consistent: {0}")]
    InconsistentSystem(String),
    #[error("word table does not define an invariant system: {0}")]
    NotInvariant(String),
    #[error("certificate does not match the system: {0}")]
    CertificateMismatch(String),
    #[error("missing weight for {0}")]
    MissingWeight(String),
    #[error("sign of a terminal condition is unresolved on {0}")]
    SignAmbiguous(String),
    #[error("no threshold in the parameter interval")]
    NoThresholdInInterval,
    #[error("threshold failed exact verification: {0}")]
    VerificationFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Path(#[from] PathError),
}

impl From<GroupError> for DeltaError {
    fn from(e: GroupError) -> Self {
        DeltaError::NotInvariant(e.to_string())
    }
}

/// The system whose metricity is being decided: either an explicit path
/// system or a `Z_n`-invariant one given by words.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Full(&'a PathSystem),
    Invariant(&'a WordTable),
}

impl Target<'_> {
    /// Number of points.
    pub fn n(&self) -> usize {
        match self {
            Target::Full(ps) => ps.n(),
            Target::Invariant(wt) => wt.n(),
        }
    }

    /// The α-metricity system with `t` left symbolic.
    pub fn metric_lp(&self) -> Result<MetricLp, DeltaError> {
        match self {
            Target::Full(ps) => build_metric_param_lp(ps, false),
            Target::Invariant(wt) => build_invariant_param_lp(wt, false),
        }
    }
}

/// α-metricity system with polynomial (degree ≤ 1) coefficients in `t`.
#[derive(Debug, Clone)]
pub struct MetricLp {
    pub system: ParamSystem,
    pub kind: CertKind,
    /// Pair or class behind each variable.
    pub labels: Vec<VarLabel>,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarLabel {
    Pair(Pair),
    Class(usize),
}

impl MetricLp {
    pub fn at(&self, t: &Rational) -> LinearSystem {
        self.system.instantiate(t)
    }

    /// Turns a feasible point into a certificate at `t`.
    pub fn certificate(&self, t: &Rational, x: &[Rational]) -> MetricCertificate {
        let mut weights = BTreeMap::new();
        for (label, v) in self.labels.iter().zip(x) {
            let key = match label {
                VarLabel::Pair(p) => format!("{},{}", p.lo(), p.hi()),
                VarLabel::Class(a) => a.to_string(),
            };
            weights.insert(key, v.clone());
        }
        MetricCertificate::from_keyed(t.clone(), self.kind, weights).expect("witness entries are at least 1")
    }
}

fn check_consistent(ps: &PathSystem) -> Result<(), DeltaError> {
    let report = validate_system(ps, None);
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(DeltaError::InconsistentSystem(format!("{:?} at {:?}", v.kind, v.pairs))),
    }
}

fn lin(terms: &[(usize, i64)]) -> Vec<(usize, ParamPoly)> {
    terms.iter().map(|&(v, c)| (v, ParamPoly::constant(c))).collect()
}

fn param_interval(n: usize) -> Interval {
    Interval::closed(Rational::one(), Rational::from_integer(n.max(1).into()))
}

/// Full system over pair variables `x_u_v`: triangle rows
/// `x_ab <= x_ac + x_cb`, lower bounds `x_ab >= 1`, and for every path with
/// at least two edges `Σ x_edges <= t·x_uv` (or `=` when `collinear`).
pub fn build_metric_param_lp(ps: &PathSystem, collinear: bool) -> Result<MetricLp, DeltaError> {
    check_consistent(ps)?;
    let n = ps.n();
    let pairs: Vec<Pair> = Pair::all(n).collect();
    let names = pairs.iter().map(|p| format!("x_{}_{}", p.lo(), p.hi())).collect();
    let mut sys = ParamSystem::new(names, param_interval(n))?;
    let idx = |a: usize, b: usize| Pair::new(a, b).index(n);
    for p in &pairs {
        let (a, b) = (p.lo(), p.hi());
        for c in (0..n).filter(|&c| c != a && c != b) {
            sys.push_sparse(
                &lin(&[(idx(a, b), 1), (idx(a, c), -1), (idx(c, b), -1)]),
                ParamPoly::zero(),
                format!("tri {a},{b};{c}"),
            );
        }
    }
    for p in &pairs {
        sys.push_sparse(&lin(&[(p.index(n), -1)]), ParamPoly::constant(-1), format!("lb {},{}", p.lo(), p.hi()));
    }
    for (p, path) in ps.iter() {
        if path.hops() < 2 {
            continue;
        }
        let edges: Vec<(usize, i64)> = path.edges().map(|(a, b)| (idx(a, b), 1)).collect();
        let mut terms = lin(&edges);
        let (u, v) = (p.lo(), p.hi());
        if collinear {
            terms.push((p.index(n), ParamPoly::constant(-1)));
            let neg: Vec<(usize, ParamPoly)> = terms.iter().map(|(v, c)| (*v, -c)).collect();
            sys.push_sparse(&terms, ParamPoly::zero(), format!("path {u},{v}"));
            sys.push_sparse(&neg, ParamPoly::zero(), format!("path= {u},{v}"));
        } else {
            terms.push((p.index(n), -&ParamPoly::t()));
            sys.push_sparse(&terms, ParamPoly::zero(), format!("path {u},{v}"));
        }
    }
    Ok(MetricLp {
        system: sys,
        kind: CertKind::Full,
        labels: pairs.into_iter().map(VarLabel::Pair).collect(),
        n,
    })
}

/// Invariance-reduced system over class variables `w_a`, `a = 1..n/2`:
/// `w_{a+b} <= w_a + w_b` for elements with `a + b != 0` (rows whose target
/// class is one of the sources are implied and skipped), `w_a >= 1`, and one
/// stretch row per class whose word has at least two letters.
pub fn build_invariant_param_lp(wt: &WordTable, collinear: bool) -> Result<MetricLp, DeltaError> {
    wt.validate()?;
    let g = wt.group();
    let n = g.n();
    let classes: Vec<usize> = (1..=n / 2).collect();
    let var = |a: usize| g.class(a) - 1;
    let names = classes.iter().map(|a| format!("w{a}")).collect();
    let mut sys = ParamSystem::new(names, param_interval(n))?;
    let mut seen = std::collections::BTreeSet::new();
    for a in 1..n {
        for b in a..n {
            let s = g.add(a, b);
            if s == 0 {
                continue;
            }
            let (ca, cb, cs) = (g.class(a), g.class(b), g.class(s));
            if cs == ca || cs == cb {
                continue;
            }
            let key = (cs, ca.min(cb), ca.max(cb));
            if !seen.insert(key) {
                continue;
            }
            let mut coeffs = vec![(var(s), 1), (var(a), -1), (var(b), -1)];
            coeffs.sort();
            sys.push_sparse(&lin(&coeffs), ParamPoly::zero(), format!("tri w{cs}<=w{}+w{}", key.1, key.2));
        }
    }
    for &a in &classes {
        sys.push_sparse(&lin(&[(a - 1, -1)]), ParamPoly::constant(-1), format!("lb w{a}"));
    }
    for &a in &classes {
        let w = wt.word(a).expect("validated table has every word");
        if w.len() < 2 {
            continue;
        }
        let letters: Vec<(usize, i64)> = w.iter().map(|&l| (var(l), 1)).collect();
        let mut terms = lin(&letters);
        if collinear {
            terms.push((a - 1, ParamPoly::constant(-1)));
            let neg: Vec<(usize, ParamPoly)> = terms.iter().map(|(v, c)| (*v, -c)).collect();
            sys.push_sparse(&terms, ParamPoly::zero(), format!("path w{a}"));
            sys.push_sparse(&neg, ParamPoly::zero(), format!("path= w{a}"));
        } else {
            terms.push((a - 1, -&ParamPoly::t()));
            sys.push_sparse(&terms, ParamPoly::zero(), format!("path w{a}"));
        }
    }
    Ok(MetricLp {
        system: sys,
        kind: CertKind::Class,
        labels: classes.into_iter().map(VarLabel::Class).collect(),
        n,
    })
}

/// The full α-metricity system at a fixed `t`.
pub fn build_metric_lp(ps: &PathSystem, t: &Rational) -> Result<LinearSystem, DeltaError> {
    Ok(build_metric_param_lp(ps, false)?.at(t))
}

/// The invariance-reduced system at a fixed `t`.
pub fn build_invariant_metric_lp(wt: &WordTable, t: &Rational) -> Result<LinearSystem, DeltaError> {
    Ok(build_invariant_param_lp(wt, false)?.at(t))
}

#[derive(Debug, Clone)]
pub struct DeltaOptions {
    /// Bisection stops once `hi - lo <= tol`.
    pub tol: Rational,
    /// Narrow the bracket with floating-point probes first; every reported
    /// bound is still decided exactly.
    pub float_prepass: bool,
    pub feasibility: FeasibilityOptions,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            tol: rational::pow10_neg(6),
            float_prepass: false,
            feasibility: FeasibilityOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaResult {
    pub lo: Rational,
    pub hi: Rational,
    /// Feasible point of the system at `hi`.
    pub certificate: MetricCertificate,
    /// Farkas multipliers proving infeasibility at `lo` (absent when the
    /// system is feasible at `lo = 1`).
    pub lo_evidence: Option<Vec<Rational>>,
    /// Exact feasibility calls.
    pub probes: usize,
    pub float_probes: usize,
}

pub fn delta_bisect(target: Target<'_>, opts: &DeltaOptions) -> Result<DeltaResult, DeltaError> {
    let lp = target.metric_lp()?;
    delta_bisect_lp(&lp, opts)
}

/// Bisection on an already built system; `lp.n` is the initial upper end.
pub fn delta_bisect_lp(lp: &MetricLp, opts: &DeltaOptions) -> Result<DeltaResult, DeltaError> {
    if !(opts.tol > Rational::zero()) {
        return Err(DeltaError::InvalidParameter("tolerance must be positive".into()));
    }
    let one = Rational::one();
    let mut probes = 0usize;
    let mut basis: Option<Vec<usize>> = None;
    let mut probe = |t: &Rational| -> Result<Feasibility, DeltaError> {
        probes += 1;
        let sys = lp.at(t);
        let sol = match &basis {
            Some(b) => feasible_from(&sys, &opts.feasibility, b)?,
            None => feasible_with(&sys, &opts.feasibility)?,
        };
        basis = Some(sol.basis);
        Ok(sol.result)
    };
    let y = match probe(&one)? {
        Feasibility::Feasible(x) => {
            return Ok(DeltaResult {
                certificate: lp.certificate(&one, &x),
                lo: one.clone(),
                hi: one,
                lo_evidence: None,
                probes: 1,
                float_probes: 0,
            })
        }
        Feasibility::Infeasible(y) => y,
    };
    let mut lo = one;
    let mut lo_evidence = y;
    let mut hi = Rational::from_integer(lp.n.max(1).into());
    let mut hi_witness = match probe(&hi)? {
        Feasibility::Feasible(x) => x,
        Feasibility::Infeasible(_) => {
            return Err(DeltaError::Lin(LinError::Internal(format!(
                "system infeasible at t = {}",
                rational::to_string(&hi)
            ))))
        }
    };

    let mut float_probes = 0;
    if opts.float_prepass {
        let (flo, fhi, count) = float_bracket(lp, &lo, &hi, &opts.tol, &opts.feasibility)?;
        float_probes = count;
        if fhi < hi {
            if let Feasibility::Feasible(x) = probe(&fhi)? {
                hi = fhi;
                hi_witness = x;
            }
        }
        if flo > lo {
            if let Feasibility::Infeasible(y) = probe(&flo)? {
                lo = flo;
                lo_evidence = y;
            }
        }
    }

    let two = Rational::from_integer(2.into());
    while &hi - &lo > opts.tol {
        let mid = (&lo + &hi) / &two;
        match probe(&mid)? {
            Feasibility::Feasible(x) => {
                hi = mid;
                hi_witness = x;
            }
            Feasibility::Infeasible(y) => {
                lo = mid;
                lo_evidence = y;
            }
        }
    }
    Ok(DeltaResult {
        certificate: lp.certificate(&hi, &hi_witness),
        lo,
        hi,
        lo_evidence: Some(lo_evidence),
        probes,
        float_probes,
    })
}

/// Floating-point bisection, then padding by a small margin so the exact
/// probes at the returned ends are likely to confirm them.
fn float_bracket(
    lp: &MetricLp,
    lo: &Rational,
    hi: &Rational,
    tol: &Rational,
    opts: &FeasibilityOptions,
) -> Result<(Rational, Rational, usize), DeltaError> {
    let margin = rational::pow10_neg(7);
    let target = if *tol > margin { tol.clone() } else { margin.clone() };
    let (mut a, mut b) = (lo.clone(), hi.clone());
    let mut count = 0;
    let two = Rational::from_integer(2.into());
    while &b - &a > target {
        let mid = (&a + &b) / &two;
        // round to 12 decimals to keep exact probes cheap
        let mid = round_to(&mid, 12);
        if mid <= a || mid >= b {
            break;
        }
        count += 1;
        match feasible_f64(&lp.at(&mid), opts)? {
            FloatFeasibility::Feasible => b = mid,
            FloatFeasibility::Infeasible => a = mid,
        }
    }
    let lo_pad = &a - &margin;
    let hi_pad = &b + &margin;
    Ok((
        if lo_pad > *lo { lo_pad } else { lo.clone() },
        if hi_pad < *hi { hi_pad } else { hi.clone() },
        count,
    ))
}

fn round_to(r: &Rational, digits: u32) -> Rational {
    let scale = Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(10), digits as usize));
    (r * &scale).round() / scale
}

/// Outcome of the collinearity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricDecision {
    pub metric: bool,
    /// A metric realizing every system path as a geodesic.
    pub witness: Option<MetricCertificate>,
    pub farkas: Option<Vec<Rational>>,
}

/// Decides whether some metric makes every path collinear
/// (`ρ(P_{u,v}) = ρ(u,v)`).
pub fn is_metric(target: Target<'_>) -> Result<MetricDecision, DeltaError> {
    let lp = match target {
        Target::Full(ps) => build_metric_param_lp(ps, true)?,
        Target::Invariant(wt) => build_invariant_param_lp(wt, true)?,
    };
    let one = Rational::one();
    Ok(match crate::linarith::feasible(&lp.at(&one))? {
        Feasibility::Feasible(x) => MetricDecision {
            metric: true,
            witness: Some(lp.certificate(&one, &x)),
            farkas: None,
        },
        Feasibility::Infeasible(y) => MetricDecision {
            metric: false,
            witness: None,
            farkas: Some(y),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{paley_system, petersen_system};
    use crate::linarith::feasible;
    use crate::pathsystem::{Graph, Path};
    use crate::rational::{int, ratio};

    fn path_graph_system(n: usize) -> PathSystem {
        let entries = Pair::all(n).map(|p| (p.lo(), p.hi(), Path::new((p.lo()..=p.hi()).collect()).unwrap()));
        PathSystem::from_entries(n, entries).unwrap().with_graph(Graph::path_graph(n)).unwrap()
    }

    #[test]
    fn petersen_lp_shape() {
        let ps = petersen_system();
        let lp = build_metric_lp(&ps, &int(1)).unwrap();
        assert_eq!(lp.num_vars(), 45);
        let count = |prefix: &str| lp.rows().iter().filter(|r| r.tag.starts_with(prefix)).count();
        assert_eq!(count("tri "), 360);
        assert_eq!(count("lb "), 45);
        assert_eq!(count("path "), 30);
    }

    #[test]
    fn single_pair() {
        let ps = PathSystem::from_entries(2, [(0, 1, Path::new(vec![0, 1]).unwrap())]).unwrap();
        let lp = build_metric_lp(&ps, &int(1)).unwrap();
        assert_eq!(lp.num_vars(), 1);
        assert_eq!(lp.len(), 1);
        let r = delta_bisect(Target::Full(&ps), &DeltaOptions::default()).unwrap();
        assert_eq!((r.lo, r.hi), (int(1), int(1)));
        assert!(is_metric(Target::Full(&ps)).unwrap().metric);
    }

    #[test]
    fn all_ones_feasible_at_n() {
        let ps = petersen_system();
        let lp = build_metric_lp(&ps, &int(10)).unwrap();
        assert_eq!(lp.first_violation(&vec![int(1); 45]), None);
    }

    #[test]
    fn invariant_rows_for_paley() {
        let wt = paley_system(29).unwrap();
        let lp = build_invariant_metric_lp(&wt, &int(2)).unwrap();
        assert_eq!(lp.num_vars(), 14);
        let has = |tag: &str, coeffs: &[(usize, Rational)]| {
            lp.rows().iter().any(|r| {
                r.tag == tag && coeffs.iter().all(|(v, c)| &r.coeffs[*v] == c)
            })
        };
        assert!(has("path w3", &[(0, int(3)), (2, int(-2))]));
        assert!(has("path w2", &[(0, int(2)), (1, int(-2))]));
    }

    #[test]
    fn five_cycle_reduced() {
        let wt = WordTable::new(5, vec![(1, vec![1]), (2, vec![1, 1]), (3, vec![-1, -1]), (4, vec![-1])]).unwrap();
        let lp = build_invariant_metric_lp(&wt, &int(1)).unwrap();
        assert_eq!(lp.num_vars(), 2);
        let paths: Vec<_> = lp.rows().iter().filter(|r| r.tag.starts_with("path")).collect();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].coeffs, vec![int(2), int(-1)]);
    }

    #[test]
    fn path_graph_is_one() {
        let ps = path_graph_system(5);
        let r = delta_bisect(Target::Full(&ps), &DeltaOptions::default()).unwrap();
        assert_eq!((r.lo.clone(), r.hi.clone()), (int(1), int(1)));
        assert!(verify_certificate(Target::Full(&ps), &r.certificate).unwrap().passed);
    }

    #[test]
    fn petersen_bracket_and_metricity() {
        let ps = petersen_system();
        let r = delta_bisect(Target::Full(&ps), &DeltaOptions::default()).unwrap();
        assert_eq!(r.lo, int(1));
        assert!(r.hi <= int(1) + ratio(1, 1_000_000));
        assert!(r.hi > int(1));
        assert!(verify_certificate(Target::Full(&ps), &r.certificate).unwrap().passed);
        let d = is_metric(Target::Full(&ps)).unwrap();
        assert!(!d.metric);
        let eq = build_metric_param_lp(&ps, true).unwrap().at(&int(1));
        assert!(eq.is_farkas_certificate(d.farkas.as_ref().unwrap()));
    }

    #[test]
    fn float_prepass_agrees() {
        let wt = paley_system(29).unwrap();
        let exact = delta_bisect(Target::Invariant(&wt), &DeltaOptions::default()).unwrap();
        let opts = DeltaOptions {
            float_prepass: true,
            ..Default::default()
        };
        let fast = delta_bisect(Target::Invariant(&wt), &opts).unwrap();
        assert!(fast.float_probes > 0);
        assert!(fast.lo <= exact.hi && exact.lo <= fast.hi);
        let lp = build_invariant_metric_lp(&wt, &fast.hi).unwrap();
        assert!(feasible(&lp).unwrap().is_feasible());
    }

    #[test]
    fn inconsistent_input_rejected() {
        let ps = PathSystem::from_entries(
            3,
            [
                (0, 2, Path::new(vec![0, 1, 2]).unwrap()),
                (0, 1, Path::new(vec![0, 2, 1]).unwrap()),
                (1, 2, Path::new(vec![1, 2]).unwrap()),
            ],
        )
        .unwrap();
        assert!(matches!(build_metric_lp(&ps, &int(1)), Err(DeltaError::InconsistentSystem(_))));
    }
}
