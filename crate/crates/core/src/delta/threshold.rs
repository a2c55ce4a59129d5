//! Exact threshold of a one-parameter system by parametric elimination.
//!
//! After every variable but one is eliminated, each cell carries rows
//! `a_i(t)·w <= b_i(t)`. On a cell the set of feasible `t` changes only at
//! roots of `a_i`, `b_i` and `a_i·b_j - a_j·b_i`, so testing one rational
//! sample per piece finds the first feasible one. Its left end is the
//! threshold, either rational or a root of an integer polynomial.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use super::DeltaError;
use crate::linarith::{
    feasible_with, isolate_roots, parametric_eliminate_with, CellStatus, FeasibilityOptions, Interval, ParamCell,
    ParamOptions, ParamPoly, ParamRow, ParamSystem, RootInterval,
};
use crate::rational::{self, Rational};

#[derive(Debug, Clone)]
pub struct ThresholdOptions {
    pub param: ParamOptions,
    /// Width of the reported isolating interval.
    pub width: Rational,
    /// Confirm the result by exact feasibility probes of the input system
    /// just below and just above it.
    pub verify: bool,
    pub feasibility: FeasibilityOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            param: ParamOptions::default(),
            width: rational::pow10_neg(15),
            verify: true,
            feasibility: FeasibilityOptions::default(),
        }
    }
}

/// Infimum of the feasible parameter values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicThreshold {
    /// Primitive squarefree polynomial with the threshold as a root; linear
    /// when the threshold is rational.
    pub polynomial: ParamPoly,
    /// Isolating interval (a point when rational).
    pub interval: RootInterval,
    pub exact: Option<Rational>,
    /// Truncated to 12 decimals.
    pub decimal: String,
    /// Kept variable.
    pub keep: usize,
    pub order: Vec<usize>,
    pub cells: Vec<ParamCell>,
    /// Exact probes done during verification.
    pub probes: usize,
}

impl AlgebraicThreshold {
    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.interval.midpoint())
    }

    /// Terminal rows of the cell containing the threshold.
    pub fn terminal_at_threshold(&self) -> Option<&ParamCell> {
        let x = self.interval.midpoint();
        self.cells.iter().find(|c| c.interval.contains(&x))
    }
}

pub fn exact_threshold(sys: &ParamSystem, order: Option<&[usize]>, keep: usize) -> Result<AlgebraicThreshold, DeltaError> {
    exact_threshold_with(sys, order, keep, &ThresholdOptions::default())
}

/// Eliminates every variable except `keep` (in `order`, or greedily when
/// `None`) and returns the least `t` in the system's interval at which it is
/// feasible. A homogeneous system gets the extra row `keep >= 1`.
pub fn exact_threshold_with(
    sys: &ParamSystem,
    order: Option<&[usize]>,
    keep: usize,
    opts: &ThresholdOptions,
) -> Result<AlgebraicThreshold, DeltaError> {
    let nv = sys.num_vars();
    if keep >= nv {
        return Err(DeltaError::InvalidParameter(format!("keep index {keep} out of range")));
    }
    if !opts.width.is_positive() {
        return Err(DeltaError::InvalidParameter("width must be positive".into()));
    }
    let mut popts = opts.param.clone();
    let order: Vec<usize> = match order {
        Some(o) => {
            let mut seen: Vec<usize> = o.to_vec();
            seen.push(keep);
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != nv || o.len() + 1 != nv {
                return Err(DeltaError::InvalidParameter(
                    "order must list every variable except the kept one exactly once".into(),
                ));
            }
            o.to_vec()
        }
        None => {
            popts.greedy = true;
            (0..nv).filter(|&v| v != keep).collect()
        }
    };
    let sys = anchored(sys, keep);
    let cells = parametric_eliminate_with(&sys, &order, &popts)?;

    let mut probes = 0usize;
    let mut probe = |t: &Rational| -> Result<bool, DeltaError> {
        probes += 1;
        Ok(feasible_with(&sys.instantiate(t), &opts.feasibility)?.result.is_feasible())
    };

    let mut found: Option<(ParamPoly, RootInterval, Option<Rational>)> = None;
    for cell in &cells {
        if let CellStatus::Unresolved { poly } = &cell.status {
            if probe(&cell.interval.hi)? {
                return Err(DeltaError::SignAmbiguous(format!(
                    "{} (root of {poly}) already feasible at its right end",
                    cell.interval
                )));
            }
            continue;
        }
        if let Some(hit) = first_feasible(cell, keep, &opts.width)? {
            found = Some(hit);
            break;
        }
    }
    let (polynomial, interval, exact) = found.ok_or(DeltaError::NoThresholdInInterval)?;

    if opts.verify {
        let margin = rational::pow10_neg(9);
        let range = sys.interval();
        let (below, above) = match &exact {
            Some(x) => (x - &margin, x + &margin),
            None => (interval.lo.clone(), interval.hi.clone()),
        };
        if range.contains(&below) && probe(&below)? {
            return Err(DeltaError::VerificationFailed(format!(
                "feasible at {} below the threshold",
                rational::to_string(&below)
            )));
        }
        let above = if range.contains(&above) { above } else { range.hi.clone() };
        if !probe(&above)? {
            return Err(DeltaError::VerificationFailed(format!(
                "infeasible at {} above the threshold",
                rational::to_string(&above)
            )));
        }
    }

    Ok(AlgebraicThreshold {
        decimal: rational::to_decimal(&interval.lo, 12),
        polynomial,
        interval,
        exact,
        keep,
        order,
        cells,
        probes,
    })
}

fn anchored(sys: &ParamSystem, keep: usize) -> ParamSystem {
    let mut out = sys.clone();
    if sys.rows().iter().all(|r| r.rhs.is_zero()) {
        out.push_sparse(&[(keep, ParamPoly::constant(-1))], ParamPoly::constant(-1), "anchor");
    }
    out
}

/// Whether `a_i·w <= b_i` has a solution in `w` at `t`.
fn terminal_feasible(rows: &[ParamRow], keep: usize, t: &Rational) -> bool {
    let mut lower: Option<Rational> = None;
    let mut upper: Option<Rational> = None;
    for row in rows {
        let a = row.coeffs[keep].eval(t);
        let b = row.rhs.eval(t);
        match a.cmp(&Rational::zero()) {
            Ordering::Equal => {
                if b.is_negative() {
                    return false;
                }
            }
            Ordering::Greater => {
                let v = b / a;
                if upper.as_ref().is_none_or(|u| v < *u) {
                    upper = Some(v);
                }
            }
            Ordering::Less => {
                let v = b / a;
                if lower.as_ref().is_none_or(|l| v > *l) {
                    lower = Some(v);
                }
            }
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) => l <= u,
        _ => true,
    }
}

#[derive(Debug, Clone)]
enum Crit {
    Rat(Rational),
    /// Irrational root with a polynomial that vanishes there.
    Irr(RootInterval, ParamPoly),
}

impl Crit {
    fn left(&self) -> &Rational {
        match self {
            Crit::Rat(x) => x,
            Crit::Irr(ri, _) => &ri.lo,
        }
    }

    fn right(&self) -> &Rational {
        match self {
            Crit::Rat(x) => x,
            Crit::Irr(ri, _) => &ri.hi,
        }
    }
}

fn sign_normalized(p: ParamPoly) -> ParamPoly {
    let p = p.primitive();
    if p.leading().is_negative() {
        -&p
    } else {
        p
    }
}

const FACTOR_BUDGET: usize = 1 << 16;

/// Critical points strictly inside `cell`, ascending.
fn critical_points(cell: &ParamCell, keep: usize, width: &Rational) -> Vec<Crit> {
    let iv = &cell.interval;
    let inside = |x: &Rational| x > &iv.lo && x < &iv.hi;
    let mut polys: Vec<ParamPoly> = Vec::new();
    let mut add = |p: ParamPoly| {
        if p.is_constant() {
            return;
        }
        let p = sign_normalized(p.squarefree());
        if !polys.contains(&p) {
            polys.push(p);
        }
    };
    let rows = &cell.terminal;
    for (i, r) in rows.iter().enumerate() {
        add(r.coeffs[keep].clone());
        add(r.rhs.clone());
        for s in &rows[i + 1..] {
            add(&(&r.coeffs[keep] * &s.rhs) - &(&s.coeffs[keep] * &r.rhs));
        }
    }

    let mut rats: Vec<Rational> = Vec::new();
    let mut rests: Vec<ParamPoly> = Vec::new();
    for p in &polys {
        let mut q = p.clone();
        for x in p.rational_roots() {
            q = q.div_exact(&ParamPoly::from_rational_root(&x)).expect("root factor divides");
            if inside(&x) && !rats.contains(&x) {
                rats.push(x);
            }
        }
        if !q.is_constant() {
            let q = sign_normalized(q);
            if !rests.contains(&q) {
                rests.push(q);
            }
        }
    }
    rats.sort();

    let mut out: Vec<Crit> = rats.iter().cloned().map(Crit::Rat).collect();
    if !rests.is_empty() {
        let product = rests.iter().skip(1).fold(rests[0].clone(), |acc, q| &acc * q);
        let combined = product.squarefree();
        let open = Interval::open(iv.lo.clone(), iv.hi.clone());
        for ri in isolate_roots(&combined, &open, width) {
            let mut ri = ri;
            while rats.iter().any(|x| x >= &ri.lo && x <= &ri.hi) {
                let w = ri.width() / Rational::from_integer(2.into());
                ri = ri.refine(&combined, &w);
            }
            // smallest polynomial known to vanish here
            let mut poly: Option<ParamPoly> = None;
            for q in &rests {
                if changes_sign(q, &ri) {
                    poly = Some(match poly {
                        None => q.clone(),
                        Some(g) => g.gcd(q),
                    });
                }
            }
            let mut poly = poly.unwrap_or_else(|| combined.clone());
            // split off factors shared with other remainders; the simple root in
            // `ri` stays with whichever part changes sign
            let mut split = true;
            while split {
                split = false;
                for q in &rests {
                    let g = poly.gcd(q);
                    if g.is_constant() || g.degree() == poly.degree() {
                        continue;
                    }
                    let rest = poly.div_exact(&g).expect("gcd divides");
                    poly = if changes_sign(&g, &ri) { g } else { rest };
                    split = true;
                }
            }
            while let Some(f) = poly.proper_factor(FACTOR_BUDGET) {
                let rest = poly.div_exact(&f).expect("factor divides");
                poly = if changes_sign(&f, &ri) { f } else { rest };
            }
            let poly = sign_normalized(poly.primitive());
            out.push(Crit::Irr(ri, poly));
        }
    }
    out.sort_by(|a, b| a.left().cmp(b.left()));
    out
}

fn changes_sign(p: &ParamPoly, ri: &RootInterval) -> bool {
    let (a, b) = (p.sign_at(&ri.lo), p.sign_at(&ri.hi));
    a != Ordering::Equal && b != Ordering::Equal && a != b
}

/// The least feasible point of a resolved cell, if any.
fn first_feasible(
    cell: &ParamCell,
    keep: usize,
    width: &Rational,
) -> Result<Option<(ParamPoly, RootInterval, Option<Rational>)>, DeltaError> {
    let iv = &cell.interval;
    let feasible = |t: &Rational| terminal_feasible(&cell.terminal, keep, t);
    let rational_hit = |x: Rational| Some((ParamPoly::from_rational_root(&x), RootInterval { lo: x.clone(), hi: x.clone() }, Some(x)));
    if iv.is_point() {
        return Ok(if feasible(&iv.lo) { rational_hit(iv.lo.clone()) } else { None });
    }
    if iv.lo_closed && feasible(&iv.lo) {
        return Ok(rational_hit(iv.lo.clone()));
    }
    let crits = critical_points(cell, keep, width);
    let two = Rational::from_integer(2.into());
    let mut prev: Option<&Crit> = None;
    for k in 0..=crits.len() {
        let left = prev.map_or(&iv.lo, Crit::right);
        let right = crits.get(k).map_or(&iv.hi, Crit::left);
        let sample = (left + right) / &two;
        if feasible(&sample) {
            return Ok(match prev {
                None => rational_hit(iv.lo.clone()),
                Some(Crit::Rat(x)) => rational_hit(x.clone()),
                Some(Crit::Irr(ri, p)) => Some((p.clone(), ri.clone(), None)),
            });
        }
        if let Some(c) = crits.get(k) {
            if let Crit::Rat(x) = c {
                if feasible(x) {
                    return Ok(rational_hit(x.clone()));
                }
            }
            prev = Some(c);
        }
    }
    if iv.hi_closed && feasible(&iv.hi) {
        return Ok(rational_hit(iv.hi.clone()));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta::{paley29_elimination_order, paley29_keep, paley29_reduced_subsystem};
    use crate::rational::{int, ratio};

    fn toy(c: i64) -> ParamSystem {
        // 3 w1 <= t w2, w2 <= c w1, w1 >= 1
        let mut s = ParamSystem::new(vec!["w1".into(), "w2".into()], Interval::closed(int(1), int(3))).unwrap();
        s.push_sparse(&[(0, ParamPoly::constant(3)), (1, -&ParamPoly::t())], ParamPoly::zero(), "s");
        s.push_sparse(&[(1, ParamPoly::constant(1)), (0, ParamPoly::constant(-c))], ParamPoly::zero(), "c");
        s.push_sparse(&[(0, ParamPoly::constant(-1))], ParamPoly::constant(-1), "lb");
        s
    }

    #[test]
    fn rational_thresholds() {
        let th = exact_threshold(&toy(2), Some(&[1]), 0).unwrap();
        assert_eq!(th.exact, Some(ratio(3, 2)));
        assert_eq!(th.polynomial, "2t-3".parse().unwrap());
        let th = exact_threshold(&toy(3), None, 1).unwrap();
        assert_eq!(th.exact, Some(int(1)));
        // w2 <= w1 forces t >= 3, the right end
        assert_eq!(exact_threshold(&toy(1), None, 0).unwrap().exact, Some(int(3)));
        let narrow = toy(1).with_interval(Interval::closed(int(1), int(2))).unwrap();
        assert!(matches!(exact_threshold(&narrow, None, 0), Err(DeltaError::NoThresholdInInterval)));
    }

    #[test]
    fn paley29_root() {
        let sys = paley29_reduced_subsystem(Interval::closed(int(1), int(2)));
        let th = exact_threshold(&sys, Some(&paley29_elimination_order()), paley29_keep()).unwrap();
        assert_eq!(th.polynomial, "2t^3-3t^2-10t+12".parse().unwrap());
        assert!(th.exact.is_none());
        assert!(th.interval.width() <= rational::pow10_neg(15));
        assert!((th.to_f64() - 1.1034306692638347).abs() < 1e-14);
        assert_eq!(th.decimal, "1.103430669263");
    }

    #[test]
    fn greedy_matches_fixed_order() {
        let sys = paley29_reduced_subsystem(Interval::closed(int(1), int(2)));
        let th = exact_threshold(&sys, None, paley29_keep()).unwrap();
        assert_eq!(th.polynomial, "2t^3-3t^2-10t+12".parse().unwrap());
    }

    #[test]
    fn bad_order() {
        let sys = toy(2);
        assert!(exact_threshold(&sys, Some(&[0]), 0).is_err());
        assert!(exact_threshold(&sys, Some(&[]), 0).is_err());
    }
}
