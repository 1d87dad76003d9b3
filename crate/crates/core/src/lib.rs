//! Fixed-point toolkit over eventually-constant sequence spaces.
//!
//! The crate provides, bottom up:
//!
//! - [`metric`]: points (scalars, vectors, grid functions) and metrics,
//!   including the weighted sup metric with weight `exp(-asin(alpha))`;
//! - [`hat`]: eventually-constant sequences (finite prefix + repeated tail)
//!   and the rehatting operation;
//! - [`geraghty`]: the catalog of comparison functions `beta: [0,inf) -> [0,1)`;
//! - [`contraction`]: the comparison gauge over tail indices and evaluators
//!   for every supported contraction inequality;
//! - [`falsify`]: seeded counterexample search for those inequalities;
//! - [`picard`]: the finite and sequence-valued iteration engines with
//!   convergence control and trace diagnostics;
//! - [`quadrature`]: tensorized Gauss-Legendre, trapezoid, and Monte Carlo
//!   rules with bit-reproducible pairwise reductions;
//! - [`integral`]: successive-approximation solvers for truncated
//!   product-domain linear and nonlinear integral equations, hypothesis
//!   checks, and independent dense collocation oracles.

// validation guards use `!(x > 0.0)` style comparisons so NaN inputs fail
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contraction;
pub mod error;
pub mod falsify;
pub mod geraghty;
pub mod hat;
pub mod integral;
pub mod metric;
pub mod picard;
pub mod quadrature;

pub use contraction::{lhs_rhs, m_k, ArgShape, ContractionKind, TupleArg};
pub use error::{Error, Result};
pub use falsify::{
    falsify, Counterexample, FalsificationReport, PointGenerator, SamplerConfig,
    COUNTEREXAMPLE_TOL,
};
pub use geraghty::{beta_sanity, BetaSanityReport, GeraghtyFn};
pub use hat::{element_at, hat, rehat, HatSequence, SeqOperator};
pub use integral::fredholm::{
    apply_fredholm, fredholm_hypothesis_checks, oracle_fredholm_dense, solve_fredholm,
    ForcingFn, FredholmProblem, KernelFn,
};
pub use integral::urysohn::{
    apply_urysohn, oracle_urysohn_dense, solve_urysohn, urysohn_hypothesis_checks,
    UrysohnIntegrandFn, UrysohnProblem,
};
pub use integral::{
    HypothesisCheck, HypothesisChecks, SolverOptions, SolverReport, DEFAULT_ORACLE_NODE_CAP,
    MAX_TENSOR_DIM,
};
pub use metric::{Grid, MetricSpace, Point};
pub use picard::{
    diagnose, infinite_k_picard, k_picard, DiagnosticsReport, FixedPointResult, IterationConfig,
    IterationTrace, DIVERGENCE_GUARD, STEP_NOISE_FLOOR,
};
pub use quadrature::{pairwise_sum, NodeSet, QuadratureRule};
