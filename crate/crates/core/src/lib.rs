//! Characteristic roots of linear time-invariant time-delay systems
//! `x'(t) = A·x(t) + B·x(t - tau)`.
//!
//! Two independent routes to the spectrum are provided: a grid-based root
//! finder for the characteristic quasipolynomial ([`qpmr`]) and the matrix
//! Lambert W representation `S = W(tau·B·Q)/tau + A` ([`lambert_dde`]). The
//! [`demo`] module runs a second-order system whose dominant roots do not
//! come from the principal branch.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod demo;
pub mod error;
pub mod io;
pub mod lambert;
pub mod lambert_dde;
pub mod linalg;
pub mod matrix_fn;
pub mod model;
pub mod qpmr;

pub use error::{Error, Result};
pub use lambert::{branch_of, lambert_w, BranchId, BranchMembership};
pub use lambert_dde::{solve_branch, LambertSolution, SolverOptions};
pub use linalg::{ComplexMatrix, ComplexScalar};
pub use matrix_fn::{eig, expm, matrix_lambert_w, BranchAssignment};
pub use model::{char_fn, residual, stability_verdict, Method, Region, SpectrumReport, TdsSystem, Verdict};
pub use qpmr::{count_roots, find_roots, refine_root, GridSpec};
