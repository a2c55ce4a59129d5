//! Fourier–Motzkin elimination for systems whose coefficients are integer
//! polynomials in a parameter `t`.
//!
//! The parameter interval is split into cells on which every pivotal
//! coefficient has constant sign. Cells are cut at rational roots exactly
//! (point cells plus open neighbours); an irrational root is enclosed in a
//! narrow open band that is reported as [`CellStatus::Unresolved`].

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::fm::{check_order, combine_tags, History};
use super::poly::{isolate_roots, Interval, ParamPoly};
use super::system::{LinearSystem, Row};
use super::LinError;
use crate::rational::{self, Rational};

/// `coeffs(t) · x <= rhs(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamRow {
    pub coeffs: Vec<ParamPoly>,
    pub rhs: ParamPoly,
    pub tag: String,
}

impl ParamRow {
    pub fn is_variable_free(&self) -> bool {
        self.coeffs.iter().all(ParamPoly::is_zero)
    }

    pub fn instantiate(&self, t: &Rational) -> Row {
        Row {
            coeffs: self.coeffs.iter().map(|c| c.eval(t)).collect(),
            rhs: self.rhs.eval(t),
            tag: self.tag.clone(),
        }
    }

    pub fn display(&self, names: &[String]) -> String {
        let mut terms = Vec::new();
        for (c, name) in self.coeffs.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            terms.push(format!("({c})*{name}"));
        }
        let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        format!("{lhs} <= ({})", self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSystem {
    var_names: Vec<String>,
    rows: Vec<ParamRow>,
    interval: Interval,
}

impl ParamSystem {
    pub fn new(var_names: Vec<String>, interval: Interval) -> Result<Self, LinError> {
        if interval.is_empty() {
            return Err(LinError::EmptyInterval);
        }
        Ok(ParamSystem {
            var_names,
            rows: Vec::new(),
            interval,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn var_index(&self, name: &str) -> Result<usize, LinError> {
        self.var_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| LinError::UnknownVariable(name.to_string()))
    }

    pub fn rows(&self) -> &[ParamRow] {
        &self.rows
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn with_interval(mut self, interval: Interval) -> Result<Self, LinError> {
        if interval.is_empty() {
            return Err(LinError::EmptyInterval);
        }
        self.interval = interval;
        Ok(self)
    }

    pub fn push(&mut self, row: ParamRow) -> Result<(), LinError> {
        if row.coeffs.len() != self.num_vars() {
            return Err(LinError::DimensionMismatch {
                row: self.rows.len(),
                expected: self.num_vars(),
                found: row.coeffs.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Adds `Σ coeff·x[var] <= rhs`; repeated variables accumulate.
    pub fn push_sparse(&mut self, terms: &[(usize, ParamPoly)], rhs: ParamPoly, tag: impl Into<String>) {
        let mut coeffs = vec![ParamPoly::zero(); self.num_vars()];
        for (v, c) in terms {
            coeffs[*v] = &coeffs[*v] + c;
        }
        self.rows.push(ParamRow {
            coeffs,
            rhs,
            tag: tag.into(),
        });
    }

    /// The ordinary system at a fixed parameter value.
    pub fn instantiate(&self, t: &Rational) -> LinearSystem {
        let mut sys = LinearSystem::with_names(self.var_names.clone());
        for row in &self.rows {
            sys.push(row.instantiate(t)).expect("row width matches");
        }
        sys
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Resolved,
    /// The cell encloses an irrational root of `poly`, a pivotal coefficient
    /// whose sign changes inside it.
    Unresolved { poly: ParamPoly },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCell {
    pub interval: Interval,
    /// Rows over the kept variables; a row with no variables is the sign
    /// condition `0 <= rhs(t)`.
    pub terminal: Vec<ParamRow>,
    pub status: CellStatus,
}

#[derive(Debug, Clone)]
pub struct ParamOptions {
    pub max_rows: usize,
    pub max_cells: usize,
    /// Width of the band left around an irrational root.
    pub root_width: Rational,
    pub chernikov: bool,
    /// Treat `order` as a set and pick, per cell, the variable minimizing
    /// the positive×negative row product.
    pub greedy: bool,
    /// Divide each derived row by the polynomial gcd of its entries when
    /// that gcd keeps one sign on the cell. Integer content is always removed.
    pub strip_factors: bool,
}

impl Default for ParamOptions {
    fn default() -> Self {
        ParamOptions {
            max_rows: 1_000_000,
            max_cells: 10_000,
            root_width: rational::pow10_neg(12),
            chernikov: true,
            greedy: false,
            strip_factors: false,
        }
    }
}

pub fn parametric_eliminate(sys: &ParamSystem, order: &[usize]) -> Result<Vec<ParamCell>, LinError> {
    parametric_eliminate_with(sys, order, &ParamOptions::default())
}

/// Eliminates the variables in `order` over every cell of the parameter
/// interval. Cells are returned in ascending order and partition it.
pub fn parametric_eliminate_with(
    sys: &ParamSystem,
    order: &[usize],
    opts: &ParamOptions,
) -> Result<Vec<ParamCell>, LinError> {
    check_order(sys.num_vars(), order)?;
    let m = sys.rows.len();
    let rows: Vec<PRow> = sys
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| PRow {
            coeffs: r.coeffs.clone(),
            rhs: r.rhs.clone(),
            tag: r.tag.clone(),
            history: History::single(i, m),
        })
        .collect();
    let mut cells = Vec::new();
    let mut work = vec![Task {
        cell: sys.interval.clone(),
        rows,
        remaining: order.to_vec(),
        step: 0,
    }];
    while let Some(task) = work.pop() {
        if cells.len() + work.len() > opts.max_cells {
            return Err(LinError::ResourceCap {
                what: "parameter cells",
                limit: opts.max_cells,
            });
        }
        match advance(task, opts)? {
            Advance::Done(cell) => cells.push(cell),
            Advance::Split(tasks, bands) => {
                work.extend(tasks);
                cells.extend(bands);
            }
        }
    }
    cells.sort_by(|a, b| cell_order(&a.interval, &b.interval));
    Ok(cells)
}

fn cell_order(a: &Interval, b: &Interval) -> Ordering {
    a.lo.cmp(&b.lo)
        .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        .then_with(|| a.hi.cmp(&b.hi))
}

#[derive(Debug, Clone)]
struct PRow {
    coeffs: Vec<ParamPoly>,
    rhs: ParamPoly,
    tag: String,
    history: History,
}

struct Task {
    cell: Interval,
    rows: Vec<PRow>,
    remaining: Vec<usize>,
    step: usize,
}

enum Advance {
    Done(ParamCell),
    Split(Vec<Task>, Vec<ParamCell>),
}

fn advance(mut task: Task, opts: &ParamOptions) -> Result<Advance, LinError> {
    if task.cell.is_point() {
        let at = task.cell.lo.clone();
        task.rows = task.rows.into_iter().map(|r| substitute(r, &at)).collect();
    }
    task.rows = prune(task.rows, &task.cell, opts.chernikov);
    if task.remaining.is_empty() {
        return Ok(Advance::Done(ParamCell {
            interval: task.cell,
            terminal: task
                .rows
                .into_iter()
                .map(|r| ParamRow {
                    coeffs: r.coeffs,
                    rhs: r.rhs,
                    tag: r.tag,
                })
                .collect(),
            status: CellStatus::Resolved,
        }));
    }
    let sample = task.cell.sample();
    let var = if opts.greedy {
        *task
            .remaining
            .iter()
            .min_by_key(|&&v| {
                let (p, n) = task.rows.iter().fold((0usize, 0usize), |(p, n), r| {
                    match r.coeffs[v].sign_at(&sample) {
                        Ordering::Greater => (p + 1, n),
                        Ordering::Less => (p, n + 1),
                        Ordering::Equal => (p, n),
                    }
                });
                (p * n, v)
            })
            .expect("remaining is nonempty")
    } else {
        task.remaining[0]
    };

    if !task.cell.is_point() {
        let mut polys: Vec<ParamPoly> = task
            .rows
            .iter()
            .map(|r| &r.coeffs[var])
            .filter(|c| !c.is_constant())
            .map(ParamPoly::squarefree)
            .collect();
        polys.sort();
        polys.dedup();
        let breaks = breakpoints(&polys, &task.cell, &opts.root_width);
        if !breaks.is_empty() {
            let mut tasks = Vec::new();
            let mut bands = Vec::new();
            for piece in pieces(&task.cell, breaks) {
                match piece {
                    Piece::Cell(interval) => tasks.push(Task {
                        cell: interval,
                        rows: task.rows.clone(),
                        remaining: task.remaining.clone(),
                        step: task.step,
                    }),
                    Piece::Band(interval, poly) => bands.push(ParamCell {
                        interval,
                        terminal: Vec::new(),
                        status: CellStatus::Unresolved { poly },
                    }),
                }
            }
            return Ok(Advance::Split(tasks, bands));
        }
    }

    let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
    for row in task.rows {
        match row.coeffs[var].sign_at(&sample) {
            Ordering::Greater => pos.push(row),
            Ordering::Less => neg.push(row),
            Ordering::Equal if row.coeffs[var].is_zero() => keep.push(row),
            Ordering::Equal => {
                return Err(LinError::DegenerateCell(format!(
                    "coefficient {} vanishes inside {}",
                    row.coeffs[var], task.cell
                )))
            }
        }
    }
    let history_cap = task.step + 2;
    for p in &pos {
        for n in &neg {
            let history = p.history.union(&n.history);
            if opts.chernikov && history.count() > history_cap {
                continue;
            }
            let fp = -&n.coeffs[var];
            let fnn = &p.coeffs[var];
            let coeffs: Vec<ParamPoly> = p
                .coeffs
                .iter()
                .zip(&n.coeffs)
                .map(|(a, b)| &(a * &fp) + &(b * fnn))
                .collect();
            if !coeffs[var].is_zero() {
                return Err(LinError::Internal("pivot coefficient did not cancel".into()));
            }
            let row = PRow {
                coeffs,
                rhs: &(&p.rhs * &fp) + &(&n.rhs * fnn),
                tag: combine_tags(&p.tag, &n.tag),
                history,
            };
            keep.push(normalize(row, &task.cell, opts.strip_factors));
            if keep.len() > opts.max_rows {
                return Err(LinError::ResourceCap {
                    what: "parametric Fourier-Motzkin rows",
                    limit: opts.max_rows,
                });
            }
        }
    }
    let remaining = task.remaining.into_iter().filter(|&v| v != var).collect();
    Ok(Advance::Split(
        vec![Task {
            cell: task.cell,
            rows: keep,
            remaining,
            step: task.step + 1,
        }],
        Vec::new(),
    ))
}

/// Replaces every entry by its value at `t`, scaled to integers.
fn substitute(row: PRow, t: &Rational) -> PRow {
    let vals: Vec<Rational> = row.coeffs.iter().chain(std::iter::once(&row.rhs)).map(|p| p.eval(t)).collect();
    if row.coeffs.iter().chain(std::iter::once(&row.rhs)).all(ParamPoly::is_constant) {
        return row;
    }
    let den = Rational::from_integer(rational::common_denominator(&vals));
    let mut ints: Vec<ParamPoly> = vals
        .iter()
        .map(|v| ParamPoly::constant((v * &den).to_integer()))
        .collect();
    let rhs = ints.pop().expect("rhs present");
    normalize(
        PRow {
            coeffs: ints,
            rhs,
            tag: row.tag,
            history: row.history,
        },
        &Interval::point(t.clone()),
        false,
    )
}

/// With `strip`, divides by the polynomial gcd of the entries when it has no
/// root in the cell; then by the integer content. A row with a single
/// nonzero entry keeps its polynomial so sign conditions stay visible.
fn normalize(mut row: PRow, cell: &Interval, strip: bool) -> PRow {
    let entries = || row.coeffs.iter().chain(std::iter::once(&row.rhs)).filter(|p| !p.is_zero());
    let g = entries().fold(ParamPoly::zero(), |acc, p| acc.gcd(p));
    if g.is_zero() {
        return row;
    }
    let single = entries().count() == 1;
    let mut divisor = ParamPoly::constant(1);
    if strip && !single && !g.is_constant() && isolate_roots(&g, cell, &Rational::one()).is_empty() {
        divisor = if g.sign_at(&cell.sample()) == Ordering::Less { -&g } else { g };
    }
    if !divisor.is_constant() {
        for c in row.coeffs.iter_mut().chain(std::iter::once(&mut row.rhs)) {
            if !c.is_zero() {
                *c = c.div_exact(&divisor).expect("gcd divides every entry");
            }
        }
    }
    let content = row
        .coeffs
        .iter()
        .chain(std::iter::once(&row.rhs))
        .fold(BigInt::zero(), |acc, p| acc.gcd(&p.content()));
    if !content.is_zero() && !content.is_one() {
        for c in row.coeffs.iter_mut().chain(std::iter::once(&mut row.rhs)) {
            *c = ParamPoly::new(c.coeffs().iter().map(|x| x / &content).collect());
        }
    }
    row
}

/// `p >= 0` throughout the cell.
fn nonnegative_on(p: &ParamPoly, cell: &Interval) -> bool {
    if p.is_zero() {
        return true;
    }
    if p.is_constant() {
        return p.leading().is_positive();
    }
    isolate_roots(p, cell, &Rational::one()).is_empty() && p.sign_at(&cell.sample()) == Ordering::Greater
}

/// Drops constant tautologies and rows dominated on the whole cell by a row
/// with the same coefficients.
fn prune(rows: Vec<PRow>, cell: &Interval, chernikov: bool) -> Vec<PRow> {
    let mut groups: HashMap<Vec<ParamPoly>, Vec<PRow>> = HashMap::new();
    let mut order = Vec::new();
    for row in rows {
        if row.coeffs.iter().all(ParamPoly::is_zero) && row.rhs.is_constant() && !row.rhs.leading().is_negative() {
            continue;
        }
        groups
            .entry(row.coeffs.clone())
            .or_insert_with(|| {
                order.push(row.coeffs.clone());
                Vec::new()
            })
            .push(row);
    }
    let dominates = |k: &PRow, r: &PRow| {
        (!chernikov || k.history.is_subset(&r.history)) && nonnegative_on(&(&r.rhs - &k.rhs), cell)
    };
    let mut out = Vec::new();
    for key in order {
        let mut kept: Vec<PRow> = Vec::new();
        for row in groups.remove(&key).expect("group exists") {
            if kept.iter().any(|k| dominates(k, &row)) {
                continue;
            }
            kept.retain(|k| !dominates(&row, k));
            kept.push(row);
        }
        out.extend(kept);
    }
    out
}

#[derive(Debug, Clone)]
enum Break {
    Exact(Rational),
    Band {
        lo: Rational,
        hi: Rational,
        lo_closed: bool,
        hi_closed: bool,
        poly: ParamPoly,
    },
}

impl Break {
    fn lo(&self) -> &Rational {
        match self {
            Break::Exact(r) => r,
            Break::Band { lo, .. } => lo,
        }
    }
}

/// Sign-change locations of `polys` inside `cell`, ascending and disjoint.
fn breakpoints(polys: &[ParamPoly], cell: &Interval, width: &Rational) -> Vec<Break> {
    let mut raw = Vec::new();
    for p in polys {
        let mut rest = p.clone();
        for r in p.rational_roots() {
            rest = rest.div_exact(&ParamPoly::from_rational_root(&r)).expect("root factor divides");
            if cell.contains(&r) {
                raw.push(Break::Exact(r));
            }
        }
        for root in isolate_roots(&rest, cell, width) {
            raw.push(Break::Band {
                lo: root.lo,
                hi: root.hi,
                lo_closed: false,
                hi_closed: false,
                poly: p.clone(),
            });
        }
    }
    raw.sort_by(|a, b| a.lo().cmp(b.lo()));
    let mut out: Vec<Break> = Vec::new();
    for b in raw {
        let merged = match (out.last_mut(), &b) {
            (Some(Break::Exact(x)), Break::Exact(y)) => x == y,
            (Some(Break::Band { hi, hi_closed, .. }), Break::Exact(y)) if y <= hi => {
                if y == hi {
                    *hi_closed = true;
                }
                true
            }
            (
                Some(Break::Band { hi, hi_closed, .. }),
                Break::Band {
                    lo: lo2,
                    hi: hi2,
                    hi_closed: hc2,
                    ..
                },
            ) if lo2 <= hi => {
                if hi2 > hi {
                    *hi = hi2.clone();
                    *hi_closed = *hc2;
                }
                true
            }
            _ => false,
        };
        if merged {
            continue;
        }
        // an exact point sitting on the left end of the next band joins it
        if let (Some(Break::Exact(x)), Break::Band { lo, hi, hi_closed, poly, .. }) = (out.last(), &b) {
            if x == lo {
                let replacement = Break::Band {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    lo_closed: true,
                    hi_closed: *hi_closed,
                    poly: poly.clone(),
                };
                *out.last_mut().unwrap() = replacement;
                continue;
            }
        }
        out.push(b);
    }
    out
}

enum Piece {
    Cell(Interval),
    Band(Interval, ParamPoly),
}

fn pieces(cell: &Interval, breaks: Vec<Break>) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut cursor = cell.lo.clone();
    let mut cursor_closed = cell.lo_closed;
    let push_cell = |out: &mut Vec<Piece>, iv: Interval| {
        if !iv.is_empty() {
            out.push(Piece::Cell(iv));
        }
    };
    for b in breaks {
        match b {
            Break::Exact(r) => {
                push_cell(
                    &mut out,
                    Interval {
                        lo: cursor.clone(),
                        hi: r.clone(),
                        lo_closed: cursor_closed,
                        hi_closed: false,
                    },
                );
                push_cell(&mut out, Interval::point(r.clone()));
                cursor = r;
                cursor_closed = false;
            }
            Break::Band {
                lo,
                hi,
                lo_closed,
                hi_closed,
                poly,
            } => {
                push_cell(
                    &mut out,
                    Interval {
                        lo: cursor.clone(),
                        hi: lo.clone(),
                        lo_closed: cursor_closed,
                        hi_closed: !lo_closed,
                    },
                );
                let mut band = Interval {
                    lo,
                    hi,
                    lo_closed,
                    hi_closed,
                };
                if band.lo <= cell.lo {
                    band.lo = cell.lo.clone();
                    band.lo_closed = cell.lo_closed && band.lo_closed;
                }
                if band.hi >= cell.hi {
                    band.hi = cell.hi.clone();
                    band.hi_closed = cell.hi_closed && band.hi_closed;
                }
                cursor = band.hi.clone();
                cursor_closed = !band.hi_closed;
                if !band.is_empty() {
                    out.push(Piece::Band(band, poly));
                }
            }
        }
    }
    push_cell(
        &mut out,
        Interval {
            lo: cursor,
            hi: cell.hi.clone(),
            lo_closed: cursor_closed,
            hi_closed: cell.hi_closed,
        },
    );
    out
}
