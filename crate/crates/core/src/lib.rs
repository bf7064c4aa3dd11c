//! Solvers for convex-concave min-max problems built on coin-betting online
//! learners, together with primal-dual gradient baselines, benchmark problems
//! (a quartic synthetic saddle and distributionally robust hinge-loss
//! minimization), LIBSVM data handling, and evaluation metrics.
//!
//! The coin-betting solvers need no step size: each side of the saddle point
//! runs a betting algorithm whose aggressiveness adapts to the observed
//! gradients. The only inputs are the feasible sets, a bound used to scale
//! gradients into the unit ball, and the iteration budget.

pub mod bettor;
pub mod data;
pub mod error;
pub mod feasible;
pub mod metrics;
pub mod problems;
pub mod simplex_bettor;
pub mod solvers;
pub mod suites;
pub mod vector;

pub use error::{Error, Result};
pub use vector::{DenseVector, SparseVector};
