//! Iteration engines: the finite `k`-step recurrence and its sequence-valued
//! counterpart, plus per-run diagnostics.
//!
//! Both engines generate `x_{n+k} = T(window)` from `k` base points. The
//! finite engine feeds `T` the window `(x_n, ..., x_{n+k-1})` directly; the
//! sequence engine feeds it the eventually-constant sequence whose prefix is
//! the window head and whose tail is the window's last point. A run stops when
//! the step distance drops to `eps_step` AND the fixed-point residual,
//! evaluated on the diagonal tuple `(u, ..., u)` (respectively the constant
//! sequence), drops to `eps_res`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geraghty::GeraghtyFn;
use crate::hat::{apply_operator, hat, HatSequence, SeqOperator};
use crate::metric::{MetricSpace, Point};

/// Step distances above this guard abort the run as diverged.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Step distances at or below this are treated as zero by the monotonicity
/// counters.
pub const STEP_NOISE_FLOOR: f64 = 1e-14;

/// Stopping thresholds and bookkeeping switches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationConfig {
    /// Threshold on the step distance `d(x_{n+k}, x_{n+k+1})`.
    pub eps_step: f64,
    /// Threshold on the residual `d(u, T(u-form))`.
    pub eps_res: f64,
    pub max_iter: usize,
    /// Record the full trace; when off only the active window is retained.
    pub record_trace: bool,
}

impl IterationConfig {
    pub fn new(eps_step: f64, eps_res: f64, max_iter: usize) -> Result<Self> {
        let cfg = IterationConfig {
            eps_step,
            eps_res,
            max_iter,
            record_trace: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_step > 0.0) || !(self.eps_res > 0.0) {
            return Err(Error::InvalidParameter(
                "eps_step and eps_res must be positive".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            eps_step: 1e-10,
            eps_res: 1e-10,
            max_iter: 10_000,
            record_trace: false,
        }
    }
}

/// Full record of a run: base points first, then every generated iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iterates: Vec<Point>,
    /// `step_distances[j]` is `d` between the window tail before and after
    /// step `j + 1`.
    pub step_distances: Vec<f64>,
    /// Gauge between consecutive iterate windows. Along a generated trace the
    /// gauge collapses to the max of adjacent step distances, because the
    /// operator value on each window is the very next iterate.
    pub mk_values: Option<Vec<f64>>,
    /// `beta(mk)` per step; filled by [`IterationTrace::fill_beta_values`].
    pub beta_values: Option<Vec<f64>>,
}

impl IterationTrace {
    /// Evaluates `beta` on the recorded gauge values.
    pub fn fill_beta_values(&mut self, beta: &GeraghtyFn) {
        self.beta_values = self
            .mk_values
            .as_ref()
            .map(|mk| mk.iter().map(|&m| beta.eval(m)).collect());
    }
}

/// Outcome of an engine run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub point: Point,
    /// `d(point, T(point-form))`, evaluated on the diagonal tuple.
    pub residual: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub trace: Option<IterationTrace>,
    /// Steps whose distance failed to strictly decrease while above the noise
    /// floor.
    pub monotone_violations: usize,
}

/// Finite `k`-step engine: `x_{n+k} = T(x_n, ..., x_{n+k-1})`.
pub fn k_picard<F>(
    op: F,
    base: &[Point],
    space: &MetricSpace,
    cfg: &IterationConfig,
) -> Result<FixedPointResult>
where
    F: Fn(&[Point]) -> Result<Point>,
{
    let step = |window: &[Point]| op(window).map_err(op_failure);
    let residual_of = |u: &Point| {
        let diag = vec![u.clone(); base.len()];
        op(&diag).map_err(op_failure)
    };
    run_engine(step, residual_of, base, space, cfg)
}

/// Sequence engine: `T` receives the window hatted at its last point, and the
/// residual is evaluated on the constant sequence.
pub fn infinite_k_picard<F>(
    op: F,
    base: &[Point],
    space: &MetricSpace,
    cfg: &IterationConfig,
) -> Result<FixedPointResult>
where
    F: SeqOperator,
{
    let step = |window: &[Point]| {
        let mut prefix = window.to_vec();
        let tail = prefix.pop().expect("window is non-empty");
        apply_operator(&op, &hat(prefix, tail)?)
    };
    let residual_of = |u: &Point| apply_operator(&op, &HatSequence::constant(u.clone()));
    run_engine(step, residual_of, base, space, cfg)
}

fn op_failure(e: Error) -> Error {
    match e {
        Error::OperatorFailure(_) => e,
        other => Error::OperatorFailure(other.to_string()),
    }
}

fn run_engine(
    step_fn: impl Fn(&[Point]) -> Result<Point>,
    residual_fn: impl Fn(&Point) -> Result<Point>,
    base: &[Point],
    space: &MetricSpace,
    cfg: &IterationConfig,
) -> Result<FixedPointResult> {
    cfg.validate()?;
    if base.is_empty() {
        return Err(Error::InvalidParameter(
            "base point set must contain at least one point".into(),
        ));
    }

    let mut window: Vec<Point> = base.to_vec();
    let mut iterates: Vec<Point> = if cfg.record_trace {
        base.to_vec()
    } else {
        Vec::new()
    };
    let mut steps: Vec<f64> = Vec::new();
    let mut violations = 0usize;
    let mut prev_step: Option<f64> = None;

    for n in 1..=cfg.max_iter {
        let x_new = step_fn(&window)?;
        if !x_new.is_finite() {
            return Err(Error::Diverged {
                iteration: n,
                step: f64::INFINITY,
            });
        }
        let step = space.distance(window.last().expect("non-empty"), &x_new)?;
        if !step.is_finite() || step > DIVERGENCE_GUARD {
            return Err(Error::Diverged { iteration: n, step });
        }

        if let Some(prev) = prev_step {
            if step >= prev && (step > STEP_NOISE_FLOOR || prev > STEP_NOISE_FLOOR) {
                violations += 1;
            }
        }
        prev_step = Some(step);

        if cfg.record_trace {
            iterates.push(x_new.clone());
        }
        steps.push(step);

        window.remove(0);
        window.push(x_new.clone());

        if step <= cfg.eps_step {
            let t_diag = residual_fn(&x_new)?;
            let residual = space.distance(&x_new, &t_diag)?;
            if residual <= cfg.eps_res {
                return Ok(finish(
                    x_new, residual, n, true, cfg, iterates, steps, violations,
                ));
            }
        }
    }

    let last = window.last().expect("non-empty").clone();
    let t_diag = residual_fn(&last)?;
    let residual = space.distance(&last, &t_diag)?;
    Ok(finish(
        last,
        residual,
        cfg.max_iter,
        false,
        cfg,
        iterates,
        steps,
        violations,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    point: Point,
    residual: f64,
    iterations_used: usize,
    converged: bool,
    cfg: &IterationConfig,
    iterates: Vec<Point>,
    steps: Vec<f64>,
    violations: usize,
) -> FixedPointResult {
    let trace = cfg.record_trace.then(|| {
        let mk: Vec<f64> = steps.windows(2).map(|w| w[0].max(w[1])).collect();
        IterationTrace {
            iterates,
            step_distances: steps,
            mk_values: Some(mk),
            beta_values: None,
        }
    });
    FixedPointResult {
        point,
        residual,
        iterations_used,
        converged,
        trace,
        monotone_violations: violations,
    }
}

/// Diagnostics extracted from a recorded trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    /// Steps that failed to strictly decrease while above the noise floor.
    pub monotone_violations: usize,
    /// Geometric rate estimated by least squares on the log step distances;
    /// `None` when fewer than two positive steps exist (e.g. a constant trace).
    pub geometric_rate: Option<f64>,
    /// Largest pairwise distance over the recorded tail window.
    pub cauchy_max_gap: f64,
}

/// Size of the tail window inspected by the Cauchy indicator.
const CAUCHY_WINDOW: usize = 10;

/// Summarizes monotonicity, estimated contraction rate, and tail spread.
pub fn diagnose(trace: &IterationTrace, space: &MetricSpace) -> Result<DiagnosticsReport> {
    let steps = &trace.step_distances;
    if steps.len() < 3 {
        return Err(Error::InsufficientTrace {
            needed: 3,
            have: steps.len(),
        });
    }

    let mut violations = 0usize;
    for w in steps.windows(2) {
        let (prev, next) = (w[0], w[1]);
        if next >= prev && (next > STEP_NOISE_FLOOR || prev > STEP_NOISE_FLOOR) {
            violations += 1;
        }
    }

    let pts: Vec<(f64, f64)> = steps
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > 0.0)
        .map(|(i, &d)| (i as f64, d.ln()))
        .collect();
    let geometric_rate = if pts.len() >= 2 {
        Some(least_squares_slope(&pts).exp())
    } else {
        None
    };

    let tail_start = trace.iterates.len().saturating_sub(CAUCHY_WINDOW);
    let tail = &trace.iterates[tail_start..];
    let mut cauchy_max_gap: f64 = 0.0;
    for (i, x) in tail.iter().enumerate() {
        for y in &tail[i + 1..] {
            cauchy_max_gap = cauchy_max_gap.max(space.distance(x, y)?);
        }
    }

    Ok(DiagnosticsReport {
        monotone_violations: violations,
        geometric_rate,
        cauchy_max_gap,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
