//! Exact linear inequality reasoning over the rationals.
//!
//! * [`feasible`] decides `Ax <= b` with a phase-one simplex and returns either
//!   a witness or a Farkas certificate.
//! * [`fm_eliminate`] projects a system with Fourier–Motzkin elimination.
//! * [`parametric_eliminate`] runs the same elimination when coefficients are
//!   integer polynomials in a parameter `t`, splitting the parameter range
//!   into cells on which every pivotal coefficient has a fixed sign.
//! * [`isolate_roots`] isolates real roots of integer polynomials.

mod fm;
pub mod lpformat;
mod parametric;
mod poly;
mod simplex;
mod system;

pub use fm::{fm_eliminate, fm_eliminate_with, FmOptions};
pub use parametric::{
    parametric_eliminate, parametric_eliminate_with, CellStatus, ParamCell, ParamOptions, ParamRow,
    ParamSystem,
};
pub use poly::{isolate_roots, Interval, ParamPoly, RootInterval};
pub use simplex::{feasible, feasible_f64, feasible_from, feasible_with, FeasibilityOptions, FloatFeasibility, Solution};
pub use system::{Feasibility, LinearSystem, Row};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LinError {
    #[error("resource cap exceeded: {what} > {limit}")]
    ResourceCap { what: &'static str, limit: usize },
    #[error("row {row} has {found} coefficients, expected {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} listed twice in elimination order")]
    RepeatedVariable(usize),
    #[error("degenerate cell {0}")]
    DegenerateCell(String),
    #[error("empty parameter interval")]
    EmptyInterval,
    #[error("internal solver error: {0}")]
    Internal(String),
}
