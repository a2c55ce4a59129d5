use std::collections::HashMap;

use num_traits::{Signed, Zero};

use super::system::{LinearSystem, Row};
use super::LinError;
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub struct FmOptions {
    /// Cap on the number of rows alive after any elimination step.
    pub max_rows: usize,
    /// Drop rows combining more than `k + 1` input rows after `k`
    /// eliminations (Chernikov's criterion).
    pub chernikov: bool,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions {
            max_rows: 1_000_000,
            chernikov: true,
        }
    }
}

/// Set of input-row indices a derived row was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct History(Vec<u64>);

impl History {
    pub(crate) fn single(i: usize, len: usize) -> Self {
        let mut words = vec![0u64; len.div_ceil(64).max(1)];
        words[i / 64] |= 1 << (i % 64);
        History(words)
    }

    pub(crate) fn union(&self, o: &Self) -> Self {
        History(self.0.iter().zip(&o.0).map(|(a, b)| a | b).collect())
    }

    pub(crate) fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn is_subset(&self, o: &Self) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
}

#[derive(Debug, Clone)]
struct FmRow {
    coeffs: Vec<Rational>,
    rhs: Rational,
    tag: String,
    history: History,
}

impl FmRow {
    /// Scales so the first nonzero coefficient has absolute value one.
    fn normalized(mut self) -> Self {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(|c| c.abs()) {
            for c in self.coeffs.iter_mut() {
                if !c.is_zero() {
                    *c /= &lead;
                }
            }
            self.rhs /= &lead;
        }
        self
    }
}

pub(crate) fn combine_tags(a: &str, b: &str) -> String {
    let wrap = |s: &str| if s.contains('+') { format!("({s})") } else { s.to_string() };
    format!("{}+{}", wrap(a), wrap(b))
}

pub fn fm_eliminate(sys: &LinearSystem, order: &[usize]) -> Result<LinearSystem, LinError> {
    fm_eliminate_with(sys, order, &FmOptions::default())
}

/// Projects out the variables in `order`, one at a time. The result keeps
/// the variable indexing of `sys`; eliminated columns are identically zero.
pub fn fm_eliminate_with(
    sys: &LinearSystem,
    order: &[usize],
    opts: &FmOptions,
) -> Result<LinearSystem, LinError> {
    check_order(sys.num_vars(), order)?;
    let m = sys.len();
    let mut rows: Vec<FmRow> = sys
        .rows()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            FmRow {
                coeffs: r.coeffs.clone(),
                rhs: r.rhs.clone(),
                tag: r.tag.clone(),
                history: History::single(i, m),
            }
            .normalized()
        })
        .collect();
    rows = prune(rows, opts.chernikov);

    for (step, &var) in order.iter().enumerate() {
        let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            if row.coeffs[var].is_positive() {
                pos.push(row);
            } else if row.coeffs[var].is_negative() {
                neg.push(row);
            } else {
                keep.push(row);
            }
        }
        let history_cap = step + 2;
        for p in &pos {
            for n in &neg {
                let history = p.history.union(&n.history);
                if opts.chernikov && history.count() > history_cap {
                    continue;
                }
                let (fp, fn_) = (-&n.coeffs[var], p.coeffs[var].clone());
                let coeffs: Vec<Rational> = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .map(|(a, b)| a * &fp + b * &fn_)
                    .collect();
                let mut row = FmRow {
                    coeffs,
                    rhs: &p.rhs * &fp + &n.rhs * &fn_,
                    tag: combine_tags(&p.tag, &n.tag),
                    history,
                };
                row.coeffs[var] = Rational::zero();
                keep.push(row.normalized());
                if keep.len() > opts.max_rows {
                    return Err(LinError::ResourceCap {
                        what: "Fourier-Motzkin rows",
                        limit: opts.max_rows,
                    });
                }
            }
        }
        rows = prune(keep, opts.chernikov);
    }

    let mut out = LinearSystem::with_names(sys.var_names().to_vec());
    out.replace_rows(
        rows.into_iter()
            .map(|r| Row {
                coeffs: r.coeffs,
                rhs: r.rhs,
                tag: r.tag,
            })
            .collect(),
    );
    Ok(out)
}

pub(crate) fn check_order(num_vars: usize, order: &[usize]) -> Result<(), LinError> {
    let mut seen = vec![false; num_vars];
    for &v in order {
        if v >= num_vars {
            return Err(LinError::UnknownVariable(format!("index {v}")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(LinError::RepeatedVariable(v));
        }
    }
    Ok(())
}

/// Drops tautologies `0 <= c` (c >= 0) and rows dominated by a row with the
/// same (normalized) coefficients and a smaller right-hand side. With
/// Chernikov pruning active a row only dominates when its history is a
/// subset of the dominated row's history.
fn prune(rows: Vec<FmRow>, chernikov: bool) -> Vec<FmRow> {
    let mut groups: HashMap<Vec<Rational>, Vec<FmRow>> = HashMap::new();
    let mut order = Vec::new();
    for row in rows {
        if row.coeffs.iter().all(Zero::is_zero) && !row.rhs.is_negative() {
            continue;
        }
        let entry = groups.entry(row.coeffs.clone()).or_insert_with(|| {
            order.push(row.coeffs.clone());
            Vec::new()
        });
        entry.push(row);
    }
    let mut out = Vec::new();
    for key in order {
        let mut group = groups.remove(&key).unwrap();
        group.sort_by(|a, b| a.rhs.cmp(&b.rhs).then(a.history.count().cmp(&b.history.count())));
        let mut kept: Vec<FmRow> = Vec::new();
        for row in group {
            let dominated = kept
                .iter()
                .any(|k| k.rhs <= row.rhs && (!chernikov || k.history.is_subset(&row.history)));
            if !dominated {
                kept.push(row);
            }
        }
        out.extend(kept);
    }
    out
}
