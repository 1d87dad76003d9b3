//! Successive-approximation solvers for truncated product-domain integral
//! equations, their hypothesis checks, and dense collocation oracles.
//!
//! The infinite product of integration axes is truncated to `n_trunc` axes.
//! Deterministic tensor rules are supported up to four axes; beyond that the
//! Monte Carlo rule must be used. The collocation grid always equals the
//! quadrature node grid, so applying an operator needs no interpolation.

pub mod fredholm;
pub mod urysohn;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::picard::IterationTrace;
use crate::quadrature::{NodeSet, QuadratureRule};

/// Largest truncation dimension served by deterministic tensor rules.
pub const MAX_TENSOR_DIM: usize = 4;

/// Default cap on collocation nodes for the dense oracles.
pub const DEFAULT_ORACLE_NODE_CAP: usize = 10_000;

/// Outcome of one sampled hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub ok: bool,
    /// Worst observed value (the meaning depends on the check).
    pub worst: f64,
    /// Number of samples inspected.
    pub samples: usize,
    /// Sample coordinates attaining the worst value, flattened.
    pub worst_at: Option<Vec<f64>>,
}

/// Hypothesis checks attached to a solver report. Checks that do not apply to
/// the problem kind stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisChecks {
    /// `max |K| < delta` over node and corner pairs.
    pub kernel_bound: Option<HypothesisCheck>,
    /// `|P(t,s,u1) - P(t,s,u2)| <= |u1 - u2| / tau` on random quadruples.
    pub lipschitz: Option<HypothesisCheck>,
    /// The constant comparison factor lies in [0, 1).
    pub beta: HypothesisCheck,
    /// Along the computed trace, consecutive step distances never grow:
    /// `d(u_{n+1}, u_{n+2}) <= (d(u_n, u_{n+1}) + d(u_{n+1}, u_{n+2})) / 2`.
    pub iterate_contraction: Option<HypothesisCheck>,
}

impl HypothesisChecks {
    /// True when every applicable check passed.
    pub fn all_ok(&self) -> bool {
        self.kernel_bound.as_ref().map_or(true, |c| c.ok)
            && self.lipschitz.as_ref().map_or(true, |c| c.ok)
            && self.beta.ok
            && self.iterate_contraction.as_ref().map_or(true, |c| c.ok)
    }
}

/// Solver switches beyond the iteration thresholds.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Proceed even when a pre-scan hypothesis fails.
    pub force: bool,
    /// Run the dense oracle and report the sup-norm gap.
    pub run_oracle: bool,
    /// Seed for sampled hypothesis checks.
    pub seed: u64,
    /// Number of sampled quadruples for the Lipschitz check.
    pub check_samples: usize,
    /// Value range for the Lipschitz check; defaults to the forcing range
    /// padded by one.
    pub u_range: Option<(f64, f64)>,
    /// Node cap for the dense oracles.
    pub oracle_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            force: false,
            run_oracle: false,
            seed: 0,
            check_samples: 4096,
            u_range: None,
            oracle_cap: DEFAULT_ORACLE_NODE_CAP,
        }
    }
}

/// Result of a solve: the grid solution, convergence data, hypothesis checks,
/// and the optional oracle gap.
#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub converged: bool,
    pub iterations: usize,
    /// Residual `d(u, Tu)` in the problem's metric, re-verified outside the
    /// iteration loop. `None` when the solve never ran.
    pub residual: Option<f64>,
    /// Solution samples on the collocation grid.
    pub solution: Option<crate::metric::Point>,
    pub hypothesis_checks: HypothesisChecks,
    /// Sup-norm gap against the dense oracle, when requested.
    pub oracle_gap: Option<f64>,
    #[serde(skip)]
    pub trace: Option<IterationTrace>,
}

pub(crate) fn build_nodes(rule: &QuadratureRule, bounds: &[(f64, f64)]) -> Result<NodeSet> {
    if bounds.len() > MAX_TENSOR_DIM && rule.is_deterministic() {
        return Err(Error::InvalidParameter(format!(
            "deterministic tensor rules support up to {MAX_TENSOR_DIM} axes; \
             use the Monte Carlo rule for {} axes",
            bounds.len()
        )));
    }
    rule.node_set(bounds)
}

/// All `2^n` corner coordinates of the box.
pub(crate) fn corners(bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for &(a, b) in bounds {
        let mut next = Vec::with_capacity(out.len() * 2);
        for stem in &out {
            for &x in &[a, b] {
                let mut c = stem.clone();
                c.push(x);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

/// Slack allowed on step-distance growth before the trace check fails.
const TRACE_CHECK_TOL: f64 = 1e-12;

/// Absolute tolerance of the sampled bound checks (kernel bound, Lipschitz).
pub(crate) const BOUND_CHECK_TOL: f64 = 1e-12;

/// Trace-level contraction check: consecutive step distances must not grow
/// (pairs where both sit at the noise floor are skipped).
pub(crate) fn iterate_contraction_check(steps: &[f64]) -> HypothesisCheck {
    use crate::picard::STEP_NOISE_FLOOR;
    let mut worst = f64::NEG_INFINITY;
    let mut samples = 0usize;
    for w in steps.windows(2) {
        let (prev, next) = (w[0], w[1]);
        if prev <= STEP_NOISE_FLOOR && next <= STEP_NOISE_FLOOR {
            continue;
        }
        samples += 1;
        worst = worst.max(next - prev);
    }
    if samples == 0 {
        return HypothesisCheck {
            ok: true,
            worst: 0.0,
            samples: 0,
            worst_at: None,
        };
    }
    HypothesisCheck {
        ok: worst <= TRACE_CHECK_TOL,
        worst,
        samples,
        worst_at: None,
    }
}

/// Check on a constant comparison factor: it must lie in [0, 1).
pub(crate) fn constant_beta_check(value: f64) -> HypothesisCheck {
    HypothesisCheck {
        ok: (0.0..1.0).contains(&value),
        worst: value,
        samples: 1,
        worst_at: None,
    }
}

/// Condition estimate from the diagonal of an LU factor.
pub(crate) fn diag_condition_estimate(u: &nalgebra::DMatrix<f64>) -> f64 {
    let mut max_d: f64 = 0.0;
    let mut min_d = f64::INFINITY;
    for i in 0..u.nrows().min(u.ncols()) {
        let d = u[(i, i)].abs();
        max_d = max_d.max(d);
        min_d = min_d.min(d);
    }
    if min_d == 0.0 {
        f64::INFINITY
    } else {
        max_d / min_d
    }
}
