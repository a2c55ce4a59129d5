//! Phase-one simplex on the Farkas alternative.
//!
//! For `Ax <= b` with `m` rows and `n` variables the solver works on
//!
//! ```text
//!     Aᵀ y = 0,   -bᵀ y = 1,   y >= 0
//! ```
//!
//! which has only `n + 1` equality rows. A zero phase-one optimum yields a
//! Farkas certificate `y`. A positive optimum yields simplex multipliers `u`
//! with `u_n > 0` and `A x <= b` for `x = u[..n] / u_n`, i.e. a witness.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's rule until the objective strictly decreases, which
//! rules out cycling.

use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use super::system::{Feasibility, LinearSystem};
use super::LinError;
use crate::rational::{self, Rational};

#[derive(Debug, Clone)]
pub struct FeasibilityOptions {
    pub max_pivots: usize,
    /// Consecutive degenerate Dantzig pivots tolerated before Bland's rule.
    pub degenerate_streak: usize,
    /// Start the exact solver from the final basis of a floating-point run.
    pub warm_start: bool,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions {
            max_pivots: 200_000,
            degenerate_streak: 32,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub result: Feasibility,
    pub pivots: usize,
    /// Final basis; pass to [`feasible_from`] to warm-start a nearby system
    /// with the same shape.
    pub basis: Vec<usize>,
}

pub fn feasible(sys: &LinearSystem) -> Result<Feasibility, LinError> {
    feasible_with(sys, &FeasibilityOptions::default()).map(|s| s.result)
}

pub fn feasible_with(sys: &LinearSystem, opts: &FeasibilityOptions) -> Result<Solution, LinError> {
    let warm = if opts.warm_start {
        let capped = FeasibilityOptions {
            max_pivots: opts.max_pivots.min(20 * (sys.len() + sys.num_vars() + 1)),
            ..opts.clone()
        };
        run_phase_one::<f64>(sys, &capped).ok().map(|(_, _, basis)| basis)
    } else {
        None
    };
    solve_exact(sys, opts, warm.as_deref())
}

/// Exact solve starting from `basis` (typically from a previous solve of a
/// system with the same rows and variables); falls back to a cold start
/// when the basis does not fit.
pub fn feasible_from(sys: &LinearSystem, opts: &FeasibilityOptions, basis: &[usize]) -> Result<Solution, LinError> {
    solve_exact(sys, opts, Some(basis))
}

fn solve_exact(sys: &LinearSystem, opts: &FeasibilityOptions, warm: Option<&[usize]>) -> Result<Solution, LinError> {
    let (phase1, pivots, basis) = exact::phase_one(sys, opts, warm)?;
    let result = match phase1 {
        PhaseOne::Certificate(y) => Feasibility::Infeasible(y),
        PhaseOne::Multipliers(u) => {
            let n = sys.num_vars();
            let scale = u[n].clone();
            if !scale.is_positive() {
                return Err(LinError::Internal("nonpositive phase-one optimum".into()));
            }
            let used = |k: usize| sys.rows().iter().any(|r| !Zero::is_zero(&r.coeffs[k]));
            Feasibility::Feasible(
                (0..n)
                    .map(|k| if used(k) { &u[k] / &scale } else { <Rational as Zero>::zero() })
                    .collect(),
            )
        }
    };
    if !result.verify(sys) {
        return Err(LinError::Internal(
            "simplex result failed exact verification".into(),
        ));
    }
    Ok(Solution { result, pivots, basis })
}

/// Floating-point verdict; used only to narrow search ranges before exact
/// probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatFeasibility {
    Feasible,
    Infeasible,
}

pub fn feasible_f64(sys: &LinearSystem, opts: &FeasibilityOptions) -> Result<FloatFeasibility, LinError> {
    let (phase1, _, _) = run_phase_one::<f64>(sys, opts)?;
    Ok(match phase1 {
        PhaseOne::Certificate(_) => FloatFeasibility::Infeasible,
        PhaseOne::Multipliers(_) => FloatFeasibility::Feasible,
    })
}

pub(crate) trait Scalar: Clone + Debug + PartialOrd {
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    /// `self -= a * b`
    fn sub_mul(&mut self, a: &Self, b: &Self);
    fn div(&self, d: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn approx(&self) -> f64;
}

impl Scalar for Rational {
    const EXACT: bool = true;
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn div(&self, d: &Self) -> Self {
        self / d
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn approx(&self) -> f64 {
        rational::to_f64(self)
    }
}

const FLOAT_EPS: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_EPS
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_EPS
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_EPS
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
        if self.abs() <= 1e-13 {
            *self = 0.0;
        }
    }
    fn div(&self, d: &Self) -> Self {
        self / d
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn approx(&self) -> f64 {
        *self
    }
}

enum PhaseOne<S> {
    /// Values of the original-row multipliers.
    Certificate(Vec<S>),
    /// Simplex multipliers of the `n + 1` equality rows.
    Multipliers(Vec<S>),
}

struct Tableau<S> {
    /// `num_rows × num_cols`; columns `0..m` are the y's, `m..m+num_rows` artificials.
    cells: Vec<Vec<S>>,
    rhs: Vec<S>,
    reduced: Vec<S>,
    objective: S,
    basis: Vec<usize>,
    m: usize,
}

impl<S: Scalar> Tableau<S> {
    fn build(sys: &LinearSystem) -> Self {
        let n = sys.num_vars();
        let m = sys.len();
        let rows = n + 1;
        let cols = m + rows;
        let mut cells = vec![vec![S::zero(); cols]; rows];
        for (j, row) in sys.rows().iter().enumerate() {
            for (k, c) in row.coeffs.iter().enumerate() {
                if !Zero::is_zero(c) {
                    cells[k][j] = S::from_rational(c);
                }
            }
            if !Zero::is_zero(&row.rhs) {
                cells[n][j] = S::from_rational(&-row.rhs.clone());
            }
        }
        for (k, row) in cells.iter_mut().enumerate() {
            row[m + k] = S::one();
        }
        let mut rhs = vec![S::zero(); rows];
        rhs[n] = S::one();
        // reduced cost c_j - Σ_k cells[k][j] with c = 1 on artificials
        let mut reduced = vec![S::zero(); cols];
        for (j, d) in reduced.iter_mut().enumerate().take(m) {
            for row in &cells {
                if !row[j].is_zero() {
                    d.sub_mul(&row[j], &S::one());
                }
            }
        }
        Tableau {
            cells,
            rhs,
            reduced,
            objective: S::one(),
            basis: (m..m + rows).collect(),
            m,
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = self.reduced[..self.m].iter().enumerate().filter(|(_, d)| d.is_neg());
        if bland {
            candidates.map(|(j, _)| j).next()
        } else {
            candidates
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(j, _)| j)
        }
    }

    /// Harris two-pass ratio test: among rows within a small feasibility
    /// tolerance of the minimum ratio, take the largest pivot element.
    fn leaving_float(&self, col: usize) -> Option<usize> {
        let entries = || {
            self.cells
                .iter()
                .enumerate()
                .map(move |(r, row)| (r, row[col].approx(), self.rhs[r].approx().max(0.0)))
                .filter(|&(_, a, _)| a > FLOAT_EPS)
        };
        let bound = entries().map(|(_, a, b)| (b + FLOAT_EPS) / a).fold(f64::INFINITY, f64::min);
        entries()
            .filter(|&(_, a, b)| b / a <= bound)
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(r, _, _)| r)
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        if !S::EXACT {
            return self.leaving_float(col);
        }
        let mut best: Option<(usize, S)> = None;
        for (r, row) in self.cells.iter().enumerate() {
            let a = &row[col];
            if !a.is_pos() {
                continue;
            }
            let ratio = self.rhs[r].div(a);
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let diff = ratio.sub(&bratio);
                    if diff.is_neg() || (diff.is_zero() && self.basis[r] < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.cells[r][c].clone();
        let width = self.cells[r].len();
        for j in 0..width {
            if !self.cells[r][j].is_zero() {
                self.cells[r][j] = self.cells[r][j].div(&p);
            }
        }
        self.cells[r][c] = S::one();
        self.rhs[r] = self.rhs[r].div(&p);
        let nz: Vec<usize> = (0..width).filter(|&j| !self.cells[r][j].is_zero()).collect();
        let (pivot_row, pivot_rhs) = (self.cells[r].clone(), self.rhs[r].clone());
        for k in 0..self.cells.len() {
            if k == r || self.cells[k][c].is_zero() {
                continue;
            }
            let f = self.cells[k][c].clone();
            let row = &mut self.cells[k];
            for &j in &nz {
                row[j].sub_mul(&f, &pivot_row[j]);
            }
            row[c] = S::zero();
            self.rhs[k].sub_mul(&f, &pivot_rhs);
        }
        let f = self.reduced[c].clone();
        if !f.is_zero() {
            for &j in &nz {
                self.reduced[j].sub_mul(&f, &pivot_row[j]);
            }
            self.reduced[c] = S::zero();
            self.objective.sub_mul(&S::zero().sub(&f), &pivot_rhs);
        }
        self.basis[r] = c;
    }
}

fn run_phase_one<S: Scalar>(
    sys: &LinearSystem,
    opts: &FeasibilityOptions,
) -> Result<(PhaseOne<S>, usize, Vec<usize>), LinError> {
    let mut tab = Tableau::<S>::build(sys);
    let mut pivots = 0usize;
    let mut streak = 0usize;
    let mut bland = false;
    while !tab.objective.is_zero() {
        let Some(col) = tab.entering(bland) else { break };
        let Some(row) = tab.leaving(col) else {
            if !S::EXACT {
                // rounding noise in a reduced cost
                tab.reduced[col] = S::zero();
                continue;
            }
            return Err(LinError::Internal("phase-one objective unbounded".into()));
        };
        if pivots >= opts.max_pivots {
            return Err(LinError::ResourceCap {
                what: "simplex pivots",
                limit: opts.max_pivots,
            });
        }
        let degenerate = tab.rhs[row].is_zero();
        tab.pivot(row, col);
        pivots += 1;
        if !S::EXACT {
            for v in tab.rhs.iter_mut().filter(|v| v.approx() < 0.0) {
                *v = S::zero();
            }
        }
        if degenerate {
            streak += 1;
            if streak > opts.degenerate_streak {
                bland = true;
            }
        } else {
            streak = 0;
            bland = false;
        }
    }
    let m = tab.m;
    if tab.objective.is_zero() || tab.objective.is_neg() {
        let mut y = vec![S::zero(); m];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < m {
                y[b] = tab.rhs[r].clone();
            }
        }
        Ok((PhaseOne::Certificate(y), pivots, tab.basis))
    } else {
        let u = (0..tab.cells.len())
            .map(|k| S::one().sub(&tab.reduced[m + k]))
            .collect();
        Ok((PhaseOne::Multipliers(u), pivots, tab.basis))
    }
}

/// Exact phase one on a fraction-free integer tableau: every entry is the
/// true value times the common denominator `d`, and a pivot divides exactly
/// by the previous `d`, so no gcds are taken.
mod exact {
    use std::cmp::Ordering;

    use num_bigint::{BigInt, Sign};
    use num_traits::{Signed, Zero};

    use super::{FeasibilityOptions, PhaseOne};
    use crate::linarith::system::LinearSystem;
    use crate::linarith::LinError;
    use crate::rational::{self, Rational};

    struct IntTableau {
        /// `n + 1` constraint rows then the objective row; the last column is
        /// the right-hand side (minus the objective value in the last row).
        rows: Vec<Vec<BigInt>>,
        d: BigInt,
        basis: Vec<usize>,
        m: usize,
    }

    impl IntTableau {
        fn build(a: &[Vec<BigInt>], b: &[BigInt], n: usize) -> Self {
            let m = a.len();
            let nr = n + 1;
            let width = m + nr + 1;
            let mut rows = vec![vec![BigInt::zero(); width]; nr + 1];
            for (j, (row, rhs)) in a.iter().zip(b).enumerate() {
                for (k, c) in row.iter().enumerate() {
                    rows[k][j] = c.clone();
                }
                rows[n][j] = -rhs;
            }
            for k in 0..nr {
                rows[k][m + k] = BigInt::from(1);
            }
            rows[n][width - 1] = BigInt::from(1);
            for j in 0..m {
                let s: BigInt = (0..nr).map(|k| &rows[k][j]).sum();
                rows[nr][j] = -s;
            }
            rows[nr][width - 1] = BigInt::from(-1);
            IntTableau {
                rows,
                d: BigInt::from(1),
                basis: (m..m + nr).collect(),
                m,
            }
        }

        fn nr(&self) -> usize {
            self.rows.len() - 1
        }

        fn rhs(&self) -> usize {
            self.rows[0].len() - 1
        }

        /// Sign of the true value behind an entry.
        fn sign(&self, x: &BigInt) -> Ordering {
            let s = match x.sign() {
                Sign::Minus => Ordering::Less,
                Sign::NoSign => Ordering::Equal,
                Sign::Plus => Ordering::Greater,
            };
            if self.d.is_negative() {
                s.reverse()
            } else {
                s
            }
        }

        fn pivot(&mut self, r: usize, c: usize) {
            let p = self.rows[r][c].clone();
            let pivot_row = self.rows[r].clone();
            let same = p == self.d;
            for (i, row) in self.rows.iter_mut().enumerate() {
                if i == r {
                    continue;
                }
                let f = row[c].clone();
                if f.is_zero() {
                    if !same {
                        for x in row.iter_mut().filter(|x| !x.is_zero()) {
                            *x = &*x * &p / &self.d;
                        }
                    }
                    continue;
                }
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if y.is_zero() {
                        if !same && !x.is_zero() {
                            *x = &*x * &p / &self.d;
                        }
                    } else {
                        *x = (&*x * &p - &f * y) / &self.d;
                    }
                }
            }
            self.d = p;
            self.basis[r] = c;
        }

        fn entering(&self, bland: bool) -> Option<usize> {
            let obj = &self.rows[self.nr()];
            let mut cands = (0..self.m).filter(|&j| self.sign(&obj[j]) == Ordering::Less);
            if bland {
                cands.next()
            } else {
                cands.max_by(|&a, &b| obj[a].abs().cmp(&obj[b].abs()).then(b.cmp(&a)))
            }
        }

        fn leaving(&self, c: usize) -> Option<usize> {
            let rhs = self.rhs();
            let mut best: Option<usize> = None;
            for i in 0..self.nr() {
                let a = &self.rows[i][c];
                if self.sign(a) != Ordering::Greater {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(k) => {
                        // rhs_i / a_i vs rhs_k / a_k with a_i·a_k > 0
                        let lhs = &self.rows[i][rhs] * &self.rows[k][c];
                        let rhs_k = &self.rows[k][rhs] * a;
                        match lhs.cmp(&rhs_k) {
                            Ordering::Less => Some(i),
                            Ordering::Equal if self.basis[i] < self.basis[k] => Some(i),
                            _ => Some(k),
                        }
                    }
                };
            }
            best
        }

        fn objective_zero(&self) -> bool {
            self.rows[self.nr()][self.rhs()].is_zero()
        }

        /// Pivots the columns of `target` into the basis.
        fn install(&mut self, target: &[usize]) {
            let width = self.rhs();
            let wanted: std::collections::BTreeSet<usize> = target.iter().copied().filter(|&c| c < width).collect();
            for &c in &wanted {
                if self.basis.contains(&c) {
                    continue;
                }
                let row = (0..self.nr())
                    .filter(|&i| !wanted.contains(&self.basis[i]) && !self.rows[i][c].is_zero())
                    .max_by(|&a, &b| self.rows[a][c].abs().cmp(&self.rows[b][c].abs()));
                if let Some(r) = row {
                    self.pivot(r, c);
                }
            }
        }

        fn primal_feasible(&self) -> bool {
            let rhs = self.rhs();
            (0..self.nr()).all(|i| self.sign(&self.rows[i][rhs]) != Ordering::Less)
        }

        fn dual_feasible(&self) -> bool {
            let obj = &self.rows[self.nr()];
            obj[..self.rhs()].iter().all(|x| self.sign(x) != Ordering::Less)
        }

        /// Dual simplex step: `None` when primal feasible, otherwise the
        /// pivot restoring it one row at a time.
        fn dual_pivot(&self) -> Result<Option<(usize, usize)>, LinError> {
            let rhs = self.rhs();
            let Some(r) = (0..self.nr())
                .filter(|&i| self.sign(&self.rows[i][rhs]) == Ordering::Less)
                .max_by(|&a, &b| self.rows[a][rhs].abs().cmp(&self.rows[b][rhs].abs()).then(b.cmp(&a)))
            else {
                return Ok(None);
            };
            let obj = &self.rows[self.nr()];
            let row = &self.rows[r];
            let mut best: Option<usize> = None;
            for j in (0..rhs).filter(|&j| self.sign(&row[j]) == Ordering::Less) {
                best = match best {
                    None => Some(j),
                    // obj_j / -a_j vs obj_k / -a_k; -a_j and -a_k share a sign
                    Some(k) => match (&obj[j] * -&row[k]).cmp(&(&obj[k] * -&row[j])) {
                        Ordering::Less => Some(j),
                        _ => Some(k),
                    },
                };
            }
            match best {
                Some(c) => Ok(Some((r, c))),
                None => Err(LinError::Internal("dual simplex found an empty phase-one region".into())),
            }
        }
    }

    fn ratio_of(num: &BigInt, den: &BigInt) -> Rational {
        Rational::new(num.clone(), den.clone())
    }

    pub(super) fn phase_one(
        sys: &LinearSystem,
        opts: &FeasibilityOptions,
        warm: Option<&[usize]>,
) -> Result<(PhaseOne<Rational>, usize, Vec<usize>), LinError> {
        let n = sys.num_vars();
        let mut a = Vec::with_capacity(sys.len());
        let mut b = Vec::with_capacity(sys.len());
        let mut scales = Vec::with_capacity(sys.len());
        for row in sys.rows() {
            let s = rational::common_denominator(row.coeffs.iter().chain(std::iter::once(&row.rhs)));
            let k = Rational::from_integer(s.clone());
            a.push(row.coeffs.iter().map(|c| (c * &k).to_integer()).collect::<Vec<_>>());
            b.push((&row.rhs * &k).to_integer());
            scales.push(s);
        }
        let cap = |pivots: usize| {
            if pivots >= opts.max_pivots {
                Err(LinError::ResourceCap {
                    what: "simplex pivots",
                    limit: opts.max_pivots,
                })
            } else {
                Ok(())
            }
        };
        let mut pivots = 0usize;
        let mut tab = IntTableau::build(&a, &b, n);
        if let Some(target) = warm {
            tab.install(target);
            if !tab.primal_feasible() {
                if tab.dual_feasible() {
                    while let Some((r, c)) = tab.dual_pivot()? {
                        cap(pivots)?;
                        tab.pivot(r, c);
                        pivots += 1;
                    }
                } else {
                    tab = IntTableau::build(&a, &b, n);
                }
            }
        }

        let mut streak = 0usize;
        let mut bland = false;
        let rhs = tab.rhs();
        while !tab.objective_zero() && tab.sign(&tab.rows[tab.nr()][rhs]) == Ordering::Less {
            let Some(col) = tab.entering(bland) else { break };
            let Some(row) = tab.leaving(col) else {
                return Err(LinError::Internal("phase-one objective unbounded".into()));
            };
            cap(pivots)?;
            let degenerate = tab.rows[row][rhs].is_zero();
            tab.pivot(row, col);
            pivots += 1;
            if degenerate {
                streak += 1;
                if streak > opts.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }
        }

        let m = tab.m;
        let nr = tab.nr();
        if tab.objective_zero() {
            let mut y = vec![Rational::zero(); m];
            for (r, &col) in tab.basis.iter().enumerate() {
                if col < m {
                    y[col] = ratio_of(&tab.rows[r][rhs], &tab.d) * Rational::from_integer(scales[col].clone());
                }
            }
            Ok((PhaseOne::Certificate(y), pivots, tab.basis))
        } else {
            let obj = &tab.rows[nr];
            let u = (0..nr).map(|k| ratio_of(&(&tab.d - &obj[m + k]), &tab.d)).collect();
            Ok((PhaseOne::Multipliers(u), pivots, tab.basis))
        }
    }
}
