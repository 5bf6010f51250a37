//! Exact continual learners for linear regression and matrix factorization.
//!
//! The learners keep, after every task, an explicit description of the set of
//! parameters that are optimal for all tasks seen so far, so they never forget
//! as long as such a common optimum exists:
//!
//! * [`icl_regression`]: a particular common minimizer plus an orthonormal
//!   basis of the intersection of the task null spaces.
//! * [`icl_subspace`]: a growing basis of the sum of the task subspaces, or
//!   the shrinking basis of its orthogonal complement.
//!
//! [`baselines`] holds the comparison methods (projected gradient descent,
//! alternating projection, rehearsal, plain least squares, incremental SVD is
//! in [`icl_subspace`]) and [`metrics`] the forgetting and generalization
//! harnesses.

pub mod baselines;
pub mod error;
pub mod icl_regression;
pub mod icl_subspace;
pub mod metrics;
pub mod numerics;
pub mod seeding;
pub mod tasks;

pub use error::{Error, Result};
pub use numerics::{Matrix, OrthonormalBasis, Vector, DEFAULT_RANK_TOL};
