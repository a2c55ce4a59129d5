//! Consistent path systems and how closely metrics can realize them.
//!
//! * [`pathsystem`]: graphs, paths, path systems and consistency checks.
//! * [`linarith`]: exact rational feasibility, Fourier–Motzkin elimination
//!   (plain and parametric in `t`) and real root isolation.
//! * [`groups`]: `Z_n`-invariant systems from word tables, the Cayley
//!   lower-bound construction, Paley and Petersen systems.
//! * [`delta`]: the α-metricity LP, bisection for `Δ(P)`, metricity,
//!   certificates and exact algebraic thresholds.
//! * [`oracle`]: brute-force references used to cross-check the above.

pub mod delta;
pub mod groups;
pub mod linarith;
pub mod oracle;
pub mod pathsystem;
pub mod rational;
