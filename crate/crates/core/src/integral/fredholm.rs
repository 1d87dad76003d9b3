//! Linear second-kind integral equation `u = f + integral K u` on `[0,1]^n`,
//! solved by successive approximation, with a dense collocation oracle.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hat::HatSequence;
use crate::metric::{MetricSpace, Point};
use crate::picard::{infinite_k_picard, IterationConfig};
use crate::quadrature::{pairwise_sum, NodeSet, QuadratureRule};

use super::{
    build_nodes, constant_beta_check, corners, diag_condition_estimate,
    iterate_contraction_check, HypothesisCheck, HypothesisChecks, SolverOptions, SolverReport,
};

/// Kernel `K(t, s)` over a pair of domain points.
pub type KernelFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// Forcing term `f(t)`.
pub type ForcingFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A truncated product-domain linear integral equation on `[0,1]^n_trunc`.
#[derive(Clone)]
pub struct FredholmProblem {
    pub n_trunc: usize,
    pub kernel: KernelFn,
    pub forcing: ForcingFn,
    /// Claimed uniform kernel bound, in (0, 1).
    pub delta: f64,
    /// Comparison constant; the solver checks `1/gamma` as the factor.
    pub gamma: f64,
}

impl fmt::Debug for FredholmProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FredholmProblem")
            .field("n_trunc", &self.n_trunc)
            .field("delta", &self.delta)
            .field("gamma", &self.gamma)
            .finish_non_exhaustive()
    }
}

impl FredholmProblem {
    pub fn new(
        n_trunc: usize,
        kernel: KernelFn,
        forcing: ForcingFn,
        delta: f64,
        gamma: f64,
    ) -> Result<Self> {
        if n_trunc == 0 {
            return Err(Error::InvalidParameter(
                "truncation dimension must be at least 1".into(),
            ));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must exceed 1, got {gamma}"
            )));
        }
        Ok(FredholmProblem {
            n_trunc,
            kernel,
            forcing,
            delta,
            gamma,
        })
    }

    /// Integration box `[0,1]^n_trunc`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 1.0); self.n_trunc]
    }

    /// Collocation nodes induced by a rule on this problem's box.
    pub fn collocation(&self, rule: &QuadratureRule) -> Result<NodeSet> {
        build_nodes(rule, &self.bounds())
    }

    /// Forcing sampled on the collocation grid.
    pub fn forcing_on(&self, nodes: &NodeSet) -> Result<Point> {
        let values: Vec<f64> = nodes.grid.nodes.iter().map(|t| (self.forcing)(t)).collect();
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "forcing at node {i} {:?}",
                    nodes.grid.nodes[i]
                )));
            }
        }
        Point::on_grid(values, Arc::clone(&nodes.grid))
    }
}

fn grid_values<'a>(u: &'a Point, nodes: &NodeSet) -> Result<&'a [f64]> {
    match u {
        Point::FunctionGrid { values, grid } => {
            if Arc::ptr_eq(grid, &nodes.grid) || **grid == *nodes.grid {
                Ok(values)
            } else {
                Err(Error::MismatchedDomain(
                    "samples live on a different collocation grid".into(),
                ))
            }
        }
        _ => Err(Error::MismatchedDomain(
            "expected samples on the collocation grid".into(),
        )),
    }
}

/// One application of the integral operator:
/// `(Tu)(t_i) = f(t_i) + sum_j w_j (K(t_i, s_j) u_j)`.
///
/// The summand associates as `w * (K * u)` and the reduction is the fixed
/// pairwise order, so the nonlinear operator with `P(t,s,u) = K(t,s) u`
/// reproduces this bit-for-bit.
pub fn apply_fredholm(u: &Point, p: &FredholmProblem, nodes: &NodeSet) -> Result<Point> {
    let uv = grid_values(u, nodes)?;
    let mut out = Vec::with_capacity(nodes.len());
    let mut terms = vec![0.0; nodes.len()];
    for (i, t) in nodes.grid.nodes.iter().enumerate() {
        for (j, s) in nodes.grid.nodes.iter().enumerate() {
            terms[j] = nodes.weights[j] * ((p.kernel)(t, s) * uv[j]);
        }
        let val = (p.forcing)(t) + pairwise_sum(&terms);
        if !val.is_finite() {
            return Err(Error::NonFinite(format!("operator value at node {i} {t:?}")));
        }
        out.push(val);
    }
    Point::on_grid(out, Arc::clone(&nodes.grid))
}

/// Pre-iteration hypothesis checks: the kernel bound over node and corner
/// pairs, and the constant comparison factor `1/gamma`.
pub fn fredholm_hypothesis_checks(
    p: &FredholmProblem,
    nodes: &NodeSet,
) -> Result<HypothesisChecks> {
    let mut scan_points: Vec<Vec<f64>> = nodes.grid.nodes.clone();
    for c in corners(&p.bounds()) {
        if !scan_points.contains(&c) {
            scan_points.push(c);
        }
    }

    let kernel = &p.kernel;
    let worst = scan_points
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut local_worst = f64::NEG_INFINITY;
            let mut local_at = (i, 0usize);
            for (j, s) in scan_points.iter().enumerate() {
                let v = kernel(t, s).abs();
                if v > local_worst {
                    local_worst = v;
                    local_at = (i, j);
                }
            }
            (local_worst, local_at)
        })
        .reduce(
            || (f64::NEG_INFINITY, (usize::MAX, usize::MAX)),
            |a, b| {
                // strict max with smallest index pair on ties, so the scan is
                // deterministic under any thread count
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let (worst_value, (wi, wj)) = worst;
    if !worst_value.is_finite() {
        return Err(Error::NonFinite("kernel value during bound scan".into()));
    }
    let mut worst_at = scan_points[wi].clone();
    worst_at.extend_from_slice(&scan_points[wj]);

    Ok(HypothesisChecks {
        kernel_bound: Some(HypothesisCheck {
            ok: worst_value <= p.delta + super::BOUND_CHECK_TOL,
            worst: worst_value,
            samples: scan_points.len() * scan_points.len(),
            worst_at: Some(worst_at),
        }),
        lipschitz: None,
        beta: constant_beta_check(1.0 / p.gamma),
        iterate_contraction: None,
    })
}

/// Successive approximation from `u_0 = f`, in the sup metric.
///
/// Fails with [`Error::HypothesisViolated`] when a pre-scan check fails and
/// `force` is not set; the trace-level contraction check is recorded in the
/// report either way.
pub fn solve_fredholm(
    p: &FredholmProblem,
    rule: &QuadratureRule,
    cfg: &IterationConfig,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    let nodes = p.collocation(rule)?;
    let mut checks = fredholm_hypothesis_checks(p, &nodes)?;
    if !opts.force {
        if let Some(kb) = &checks.kernel_bound {
            if !kb.ok {
                return Err(Error::HypothesisViolated {
                    condition: format!("kernel bound |K| < {}", p.delta),
                    worst: kb.worst,
                });
            }
        }
        if !checks.beta.ok {
            return Err(Error::HypothesisViolated {
                condition: "comparison factor 1/gamma in [0, 1)".into(),
                worst: checks.beta.worst,
            });
        }
    }

    let u0 = p.forcing_on(&nodes)?;
    let space = MetricSpace::SupOnGrid;
    let op = |seq: &HatSequence| apply_fredholm(seq.element_at(1), p, &nodes);
    let mut inner_cfg = cfg.clone();
    inner_cfg.record_trace = true;

    let result = infinite_k_picard(op, &[u0], &space, &inner_cfg)?;
    let trace = result.trace.expect("trace recording was enabled");
    checks.iterate_contraction = Some(iterate_contraction_check(&trace.step_distances));

    // residual re-verified outside the iteration loop
    let image = apply_fredholm(&result.point, p, &nodes)?;
    let residual = space.distance(&result.point, &image)?;

    let oracle_gap = if opts.run_oracle {
        let dense = oracle_fredholm_dense(p, &nodes, opts.oracle_cap)?;
        Some(MetricSpace::SupOnGrid.distance(&result.point, &dense)?)
    } else {
        None
    };

    Ok(SolverReport {
        converged: result.converged,
        iterations: result.iterations_used,
        residual: Some(residual),
        solution: Some(result.point),
        hypothesis_checks: checks,
        oracle_gap,
        trace: cfg.record_trace.then_some(trace),
    })
}

/// Dense collocation oracle: assembles
/// `u_i - sum_j w_j K(t_i, s_j) u_j = f(t_i)` and solves it by LU with
/// partial pivoting. Independent of the iteration path.
pub fn oracle_fredholm_dense(
    p: &FredholmProblem,
    nodes: &NodeSet,
    cap: usize,
) -> Result<Point> {
    if !nodes.deterministic {
        return Err(Error::InvalidParameter(
            "dense oracle requires a deterministic quadrature rule".into(),
        ));
    }
    let n = nodes.len();
    if n > cap {
        return Err(Error::CapExceeded { nodes: n, cap });
    }

    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..n {
        let t = &nodes.grid.nodes[i];
        for j in 0..n {
            let s = &nodes.grid.nodes[j];
            let kij = (p.kernel)(t, s);
            if !kij.is_finite() {
                return Err(Error::NonFinite(format!("kernel at nodes {i}, {j}")));
            }
            a[(i, j)] = if i == j { 1.0 } else { 0.0 } - nodes.weights[j] * kij;
        }
        let fi = (p.forcing)(t);
        if !fi.is_finite() {
            return Err(Error::NonFinite(format!("forcing at node {i}")));
        }
        b[i] = fi;
    }

    let lu = a.lu();
    let cond_estimate = diag_condition_estimate(&lu.u());
    match lu.solve(&b) {
        Some(x) => {
            let values: Vec<f64> = x.iter().copied().collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::SingularSystem { cond_estimate });
            }
            Point::on_grid(values, Arc::clone(&nodes.grid))
        }
        None => Err(Error::SingularSystem { cond_estimate }),
    }
}
