use num_traits::{Signed, Zero};

use super::LinError;
use crate::rational::{self, Rational};

/// One constraint `coeffs · x <= rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub tag: String,
}

impl Row {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .filter(|(c, _)| !c.is_zero())
            .fold(Rational::zero(), |acc, (c, v)| acc + c * v)
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.eval(x) <= self.rhs
    }

    pub fn is_zero_row(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

/// A conjunction of rows `coeffs · x <= rhs` over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    num_vars: usize,
    var_names: Vec<String>,
    rows: Vec<Row>,
}

impl LinearSystem {
    /// Variables are named `x0, x1, ...`.
    pub fn new(num_vars: usize) -> Self {
        Self::with_names((0..num_vars).map(|i| format!("x{i}")).collect())
    }

    pub fn with_names(var_names: Vec<String>) -> Self {
        LinearSystem {
            num_vars: var_names.len(),
            var_names,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
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

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Row) -> Result<(), LinError> {
        if row.coeffs.len() != self.num_vars {
            return Err(LinError::DimensionMismatch {
                row: self.rows.len(),
                expected: self.num_vars,
                found: row.coeffs.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Adds `Σ coeff·x[var] <= rhs`; repeated variables accumulate.
    pub fn push_sparse(&mut self, terms: &[(usize, Rational)], rhs: Rational, tag: impl Into<String>) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            coeffs[*var] += c;
        }
        self.rows.push(Row {
            coeffs,
            rhs,
            tag: tag.into(),
        });
    }

    /// Index of the first row violated by `x`, if any.
    pub fn first_violation(&self, x: &[Rational]) -> Option<usize> {
        if x.len() != self.num_vars {
            return Some(0);
        }
        self.rows.iter().position(|r| !r.is_satisfied_by(x))
    }

    /// Checks `y >= 0`, `yᵀA = 0` and `yᵀb < 0`.
    pub fn is_farkas_certificate(&self, y: &[Rational]) -> bool {
        if y.len() != self.rows.len() || y.iter().any(Signed::is_negative) {
            return false;
        }
        let mut combo = vec![Rational::zero(); self.num_vars];
        let mut rhs = Rational::zero();
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (acc, c) in combo.iter_mut().zip(&row.coeffs) {
                if !c.is_zero() {
                    *acc += yi * c;
                }
            }
            rhs += yi * &row.rhs;
        }
        combo.iter().all(Zero::is_zero) && rhs.is_negative()
    }

    pub(crate) fn replace_rows(&mut self, rows: Vec<Row>) {
        self.rows = rows;
    }

    /// Renders the system in lp/v1 text form.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut terms = Vec::new();
            for (i, c) in row.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                terms.push(format!("{}*{}", rational::to_string(c), self.var_names[i]));
            }
            let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            out.push_str(&format!("{} <= {}", lhs, rational::to_string(&row.rhs)));
            if !row.tag.is_empty() {
                out.push_str(&format!(" # {}", row.tag));
            }
            out.push('\n');
        }
        out
    }
}

/// Outcome of an exact feasibility decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    /// A point satisfying every row.
    Feasible(Vec<Rational>),
    /// Nonnegative row multipliers `y` with `yᵀA = 0`, `yᵀb < 0`.
    Infeasible(Vec<Rational>),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    /// Re-checks the witness or certificate by substitution.
    pub fn verify(&self, sys: &LinearSystem) -> bool {
        match self {
            Feasibility::Feasible(x) => sys.first_violation(x).is_none(),
            Feasibility::Infeasible(y) => sys.is_farkas_certificate(y),
        }
    }
}
