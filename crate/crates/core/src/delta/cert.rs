use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use super::{DeltaError, Target};
use crate::groups::CyclicGroup;
use crate::pathsystem::{path_cost, Pair, PairWeights};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    /// One weight per unordered pair.
    Full,
    /// One weight per class `{a, -a}` of `Z_n`.
    Class,
}

impl CertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertKind::Full => "full",
            CertKind::Class => "class",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertWeights {
    Full(PairWeights),
    Class(BTreeMap<usize, Rational>),
}

/// A metric together with the stretch bound `t` it is claimed to achieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricCertificate {
    pub t: Rational,
    pub weights: CertWeights,
}

impl MetricCertificate {
    pub fn full(t: Rational, weights: PairWeights) -> Self {
        MetricCertificate {
            t,
            weights: CertWeights::Full(weights),
        }
    }

    pub fn class(t: Rational, weights: BTreeMap<usize, Rational>) -> Result<Self, DeltaError> {
        if let Some((a, _)) = weights.iter().find(|(a, w)| **a == 0 || !w.is_positive()) {
            return Err(DeltaError::InvalidParameter(format!("class {a} needs a positive weight and id >= 1")));
        }
        Ok(MetricCertificate {
            t,
            weights: CertWeights::Class(weights),
        })
    }

    pub fn kind(&self) -> CertKind {
        match self.weights {
            CertWeights::Full(_) => CertKind::Full,
            CertWeights::Class(_) => CertKind::Class,
        }
    }

    /// Builds from string keys `"u,v"` (full) or `"a"` (class).
    pub fn from_keyed(t: Rational, kind: CertKind, weights: BTreeMap<String, Rational>) -> Result<Self, DeltaError> {
        let bad = |k: &str| DeltaError::InvalidParameter(format!("bad weight key {k:?}"));
        match kind {
            CertKind::Full => {
                let mut pw = PairWeights::new();
                for (k, w) in weights {
                    let (u, v) = k.split_once(',').ok_or_else(|| bad(&k))?;
                    let u: usize = u.trim().parse().map_err(|_| bad(&k))?;
                    let v: usize = v.trim().parse().map_err(|_| bad(&k))?;
                    pw.insert(u, v, w)?;
                }
                Ok(Self::full(t, pw))
            }
            CertKind::Class => {
                let mut cw = BTreeMap::new();
                for (k, w) in weights {
                    cw.insert(k.trim().parse::<usize>().map_err(|_| bad(&k))?, w);
                }
                Self::class(t, cw)
            }
        }
    }

    pub fn to_json_value(&self) -> Value {
        let weights: serde_json::Map<String, Value> = match &self.weights {
            CertWeights::Full(pw) => pw
                .iter()
                .map(|(p, w)| (format!("{},{}", p.lo(), p.hi()), json!(rational::to_string(w))))
                .collect(),
            CertWeights::Class(cw) => cw
                .iter()
                .map(|(a, w)| (a.to_string(), json!(rational::to_string(w))))
                .collect(),
        };
        json!({
            "format": "metric-cert/v1",
            "t": rational::to_string(&self.t),
            "kind": self.kind().as_str(),
            "weights": weights,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("json value serializes")
    }

    pub fn from_json_value(v: &Value) -> Result<Self, DeltaError> {
        let bad = |m: &str| DeltaError::InvalidParameter(m.to_string());
        if v.get("format").and_then(Value::as_str) != Some("metric-cert/v1") {
            return Err(bad("expected format metric-cert/v1"));
        }
        let t = v
            .get("t")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("t must be a rational string"))
            .and_then(|s| rational::parse_rational(s).map_err(|e| bad(&e.to_string())))?;
        let kind = match v.get("kind").and_then(Value::as_str) {
            Some("full") => CertKind::Full,
            Some("class") => CertKind::Class,
            _ => return Err(bad("kind must be \"full\" or \"class\"")),
        };
        let mut weights = BTreeMap::new();
        for (k, w) in v.get("weights").and_then(Value::as_object).ok_or_else(|| bad("missing weights"))? {
            let w = w
                .as_str()
                .ok_or_else(|| bad("weights must be rational strings"))
                .and_then(|s| rational::parse_rational(s).map_err(|e| bad(&e.to_string())))?;
            weights.insert(k.clone(), w);
        }
        Self::from_keyed(t, kind, weights)
    }

    pub fn from_json(text: &str) -> Result<Self, DeltaError> {
        let v: Value = serde_json::from_str(text).map_err(|e| DeltaError::InvalidParameter(e.to_string()))?;
        Self::from_json_value(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertViolationKind {
    Triangle,
    Stretch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertViolation {
    pub kind: CertViolationKind,
    /// `"u,v"` for a pair, `"a"` for a class.
    pub at: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub passed: bool,
    pub t: Rational,
    /// Largest `ρ(P_{u,v}) / ρ(u,v)` over all pairs.
    pub max_stretch: Rational,
    pub worst: Option<String>,
    pub triangle_checks: usize,
    pub stretch_checks: usize,
    /// At most [`MAX_REPORTED`] entries.
    pub violations: Vec<CertViolation>,
    pub violation_count: usize,
}

pub const MAX_REPORTED: usize = 100;

impl VerificationReport {
    fn new(t: &Rational) -> Self {
        VerificationReport {
            passed: true,
            t: t.clone(),
            max_stretch: Rational::one(),
            worst: None,
            triangle_checks: 0,
            stretch_checks: 0,
            violations: Vec::new(),
            violation_count: 0,
        }
    }

    fn fail(&mut self, kind: CertViolationKind, at: String, detail: String) {
        self.passed = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_REPORTED {
            self.violations.push(CertViolation { kind, at, detail });
        }
    }

    fn stretch(&mut self, at: String, cost: &Rational, base: &Rational) {
        self.stretch_checks += 1;
        let s = cost / base;
        if s > self.max_stretch || (self.worst.is_none() && s == self.max_stretch && s > Rational::one()) {
            self.max_stretch = s.clone();
            self.worst = Some(at.clone());
        }
        if s > self.t {
            self.fail(
                CertViolationKind::Stretch,
                at,
                format!("stretch {} exceeds t = {}", rational::to_string(&s), rational::to_string(&self.t)),
            );
        }
    }
}

/// Checks the triangle inequality everywhere and `ρ(P_{u,v}) <= t·ρ(u,v)`
/// for every pair.
pub fn verify_certificate(target: Target<'_>, cert: &MetricCertificate) -> Result<VerificationReport, DeltaError> {
    match (target, &cert.weights) {
        (Target::Full(ps), CertWeights::Full(pw)) => verify_full(ps, pw, &cert.t),
        (Target::Full(ps), CertWeights::Class(cw)) => {
            let pw = expand_class_weights(ps.n(), cw)?;
            verify_full(ps, &pw, &cert.t)
        }
        (Target::Invariant(wt), CertWeights::Class(cw)) => verify_class(wt, cw, &cert.t),
        (Target::Invariant(_), CertWeights::Full(_)) => Err(DeltaError::CertificateMismatch(
            "an invariant system needs a class certificate".into(),
        )),
    }
}

/// `ρ(u, v) = w_{class(v - u)}`.
pub fn expand_class_weights(n: usize, cw: &BTreeMap<usize, Rational>) -> Result<PairWeights, DeltaError> {
    let g = CyclicGroup::new(n.max(2)).map_err(|e| DeltaError::InvalidParameter(e.to_string()))?;
    let mut pw = PairWeights::new();
    for p in Pair::all(n) {
        let a = g.class(p.hi() - p.lo());
        let w = cw.get(&a).ok_or_else(|| DeltaError::MissingWeight(format!("class {a}")))?;
        pw.insert(p.lo(), p.hi(), w.clone())?;
    }
    Ok(pw)
}

fn verify_full(
    ps: &crate::pathsystem::PathSystem,
    pw: &PairWeights,
    t: &Rational,
) -> Result<VerificationReport, DeltaError> {
    let n = ps.n();
    let mut report = VerificationReport::new(t);
    let mut w = vec![vec![Rational::zero(); n]; n];
    for p in Pair::all(n) {
        let v = pw
            .get(p.lo(), p.hi())
            .ok_or_else(|| DeltaError::MissingWeight(format!("pair {},{}", p.lo(), p.hi())))?;
        w[p.lo()][p.hi()] = v.clone();
        w[p.hi()][p.lo()] = v.clone();
    }
    for p in Pair::all(n) {
        let (a, b) = (p.lo(), p.hi());
        for c in (0..n).filter(|&c| c != a && c != b) {
            report.triangle_checks += 1;
            if w[a][b] > &w[a][c] + &w[c][b] {
                report.fail(
                    CertViolationKind::Triangle,
                    format!("{a},{b}"),
                    format!("rho({a},{b}) > rho({a},{c}) + rho({c},{b})"),
                );
            }
        }
    }
    for (p, path) in ps.iter() {
        let cost = path_cost(path, pw)?;
        report.stretch(format!("{},{}", p.lo(), p.hi()), &cost, &w[p.lo()][p.hi()]);
    }
    Ok(report)
}

fn verify_class(
    wt: &crate::groups::WordTable,
    cw: &BTreeMap<usize, Rational>,
    t: &Rational,
) -> Result<VerificationReport, DeltaError> {
    let g = wt.group();
    let n = g.n();
    let mut report = VerificationReport::new(t);
    let mut w = vec![Rational::zero(); n / 2 + 1];
    for (a, slot) in w.iter_mut().enumerate().skip(1) {
        *slot = cw
            .get(&a)
            .cloned()
            .ok_or_else(|| DeltaError::MissingWeight(format!("class {a}")))?;
    }
    if let Some(a) = cw.keys().find(|&&a| a > n / 2) {
        return Err(DeltaError::CertificateMismatch(format!("class {a} out of range for n = {n}")));
    }
    let wc = |a: usize| &w[g.class(a)];
    for a in 1..n {
        for b in a..n {
            let s = g.add(a, b);
            if s == 0 {
                continue;
            }
            report.triangle_checks += 1;
            if wc(s) > &(wc(a) + wc(b)) {
                report.fail(
                    CertViolationKind::Triangle,
                    g.class(s).to_string(),
                    format!("w{} > w{} + w{}", g.class(s), g.class(a), g.class(b)),
                );
            }
        }
    }
    for a in 1..=n / 2 {
        let word = wt.word(a).ok_or_else(|| DeltaError::NotInvariant(format!("no word for {a}")))?;
        let cost = word.iter().fold(Rational::zero(), |acc, &l| acc + wc(l));
        report.stretch(a.to_string(), &cost, &w[a]);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::petersen_system;
    use crate::rational::{int, ratio};

    #[test]
    fn json_round_trip() {
        let mut cw = BTreeMap::new();
        cw.insert(1, ratio(3, 2));
        cw.insert(2, int(2));
        let c = MetricCertificate::class(ratio(7, 5), cw).unwrap();
        assert_eq!(MetricCertificate::from_json(&c.to_json()).unwrap(), c);
        let c = MetricCertificate::full(int(3), PairWeights::uniform(3, int(1)));
        let v = c.to_json_value();
        assert_eq!(v["weights"]["0,2"], "1");
        assert_eq!(MetricCertificate::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn petersen_unit_weights() {
        let ps = petersen_system();
        let unit = MetricCertificate::full(int(1), PairWeights::uniform(10, int(1)));
        let r = verify_certificate(Target::Full(&ps), &unit).unwrap();
        assert!(!r.passed);
        assert_eq!(r.max_stretch, int(3));
        let bad = r.violations.iter().find(|v| v.at == "1,7").unwrap();
        assert!(bad.detail.starts_with("stretch 3 "));
        let at_n = MetricCertificate::full(int(10), PairWeights::uniform(10, int(1)));
        assert!(verify_certificate(Target::Full(&ps), &at_n).unwrap().passed);
    }

    #[test]
    fn missing_weight() {
        let ps = petersen_system();
        let c = MetricCertificate::full(int(10), PairWeights::uniform(9, int(1)));
        assert!(matches!(verify_certificate(Target::Full(&ps), &c), Err(DeltaError::MissingWeight(_))));
    }
}
