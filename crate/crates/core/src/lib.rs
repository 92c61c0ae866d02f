//! Order-statistic selection by convex nonsmooth minimization.
//!
//! The `j`-th smallest element of a sample minimizes a piecewise-linear
//! convex function whose value and subgradient at any point take one
//! parallel reduction to compute. [`solvers`] shrinks a bracket around that
//! minimizer; [`hybrid`] finishes exactly by sorting the few elements left
//! inside the bracket.
//!
//! ```
//! use cpselect::{hybrid_select, HybridConfig, Sample, SelectionSpec};
//!
//! let sample = Sample::new(vec![9.0, 1.0, 7.0, 3.0, 5.0]).unwrap();
//! let median = hybrid_select(&sample, SelectionSpec::Median, &HybridConfig::default()).unwrap();
//! assert_eq!(median.value, 5.0);
//! ```

pub mod baselines;
pub mod datagen;
mod error;
pub mod hybrid;
pub mod objective;
mod real;
pub mod reduce;
pub mod robust;
mod sample;
pub mod solvers;

pub use baselines::{quickselect, sort_select};
pub use datagen::{generate, inject_extremes, Distribution, DistributionSpec};
pub use error::{Error, Result};
pub use hybrid::{exact_finish, hybrid_select, select, select_with, HybridConfig};
pub use objective::{Objective, ObjectiveEval, OsWeights, TransformMode, TransformSpec};
pub use real::Real;
pub use sample::{Method, Sample, SelectionResult, SelectionSpec, SubgradientInterval};
pub use solvers::{Solver, SolverConfig, SolverOutcome, SolverState, Status};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/objective.md")]
    mod objective {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/hybrid.md")]
    mod hybrid {}
    #[doc = include_str!("../../../book/src/datagen.md")]
    mod datagen {}
    #[doc = include_str!("../../../book/src/robust.md")]
    mod robust {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
