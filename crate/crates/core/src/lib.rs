//! Explicit stochastic Runge-Kutta schemes for the weak approximation of Itô
//! SDEs: coefficient tableaux, the weak order conditions, the parametric
//! families of order (1,1), (2,1), (2,2) and (3,2), an SRK integrator driven
//! by three-point increments, and Monte Carlo weak error estimation.
//!
//! ```
//! use srk_core::{conditions, families::{named_scheme, NamedScheme}};
//!
//! let t = named_scheme(NamedScheme::Rdi3wm);
//! let report = conditions::evaluate_all(&t, 1e-12).unwrap();
//! assert_eq!((report.inferred.deterministic, report.inferred.stochastic), (3, 2));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod conditions;
pub mod error;
pub mod estimator;
pub mod families;
pub mod integrator;
pub mod linalg;
pub mod problems;
pub mod random;
pub mod tableau;

pub use conditions::{evaluate_all, ConditionId, ConditionReport};
pub use error::{Error, Result};
pub use estimator::{estimate, fit_order, run_study, ConvergenceStudy, EstimateOptions, Scheme, WeakErrorReport};
pub use families::{make_family, named_scheme, FamilyId, FamilyParams, NamedScheme};
pub use integrator::{evaluation_cost, simulate_path, srk_step, EvaluationCost, SdeProblem, StepContext};
pub use problems::{problem_2d, problem_by_name, problem_linear, problem_nonlinear, NamedProblem};
pub use random::{RngStream, WeakIncrementBatch};
pub use tableau::{CoefficientTableau, OrderClaim};
