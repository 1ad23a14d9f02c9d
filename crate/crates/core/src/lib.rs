//! Numerical toolkit for (p,q)-Lupaş Bernstein operators and their
//! King-type modification.
//!
//! * [`pq_core`]: (p,q)-integers, factorials, binomials and `(1-x)^n_{p,q}`.
//! * [`operators`]: the (p,q)-Bernstein, (p,q)-Lupaş and King-modified
//!   operators, plus the substitution `r_n(x)`.
//! * [`moments`]: closed-form and numerically evaluated moments.
//! * [`error_analysis`]: modulus of continuity, error bounds and the
//!   King-versus-Lupaş comparison on subintervals.
//! * [`statconv`]: natural density, statistical convergence diagnostics and
//!   parameter sequences `(p_n, q_n)`.
//! * [`audit`]: alternative printed forms of several closed-form
//!   expressions, kept for side-by-side comparison.

pub mod audit;
pub mod compensated;
pub mod error;
pub mod error_analysis;
pub mod functions;
pub mod grid;
pub mod moments;
pub mod operators;
pub mod output;
pub mod pq_core;
pub mod statconv;

pub use error::{Error, ErrorKind, Result};
pub use functions::{Builtin, Lipschitz, TargetFunction};
pub use grid::uniform_grid;
pub use operators::{Family, Operator, OperatorSpec};
pub use pq_core::{PQPair, PairMode};
