//! Builds core problems out of parsed files, runs them, and classifies the
//! outcome for exit-status mapping.

use std::sync::Arc;

use picardo_core::{
    diagnose, falsify, fredholm_hypothesis_checks, infinite_k_picard, k_picard, solve_fredholm,
    solve_urysohn, DiagnosticsReport, Error as CoreError, FalsificationReport, ForcingFn,
    FredholmProblem, GeraghtyFn, HatSequence, IterationConfig, IterationTrace, KernelFn,
    MetricSpace, Point, PointGenerator, SamplerConfig, SolverOptions, SolverReport,
    UrysohnIntegrandFn, UrysohnProblem,
};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{compile, CompiledExpr, ExprError};
use crate::problem::{
    ContractionCheckSpec, EngineKind, FredholmSpec, OperatorIterationSpec, ProblemError,
    ProblemFile, ProblemKind, UrysohnSpec,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Expr(#[from] ExprError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Exit status per the documented table: 1 usage/parse, 2 hypothesis
    /// violated, 3 diverged.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Diverged { .. }) => 3,
            CliError::Core(CoreError::HypothesisViolated { .. }) => 2,
            _ => 1,
        }
    }
}

/// Flag overrides shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub trace: bool,
    pub oracle: bool,
    pub force: bool,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub eps_step: Option<f64>,
    pub eps_res: Option<f64>,
}

/// Outcome bucket, mapped to the exit status by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Converged or no counterexample found: exit 0.
    Pass,
    /// A hypothesis check failed and `--force` was not given: exit 2.
    HypothesisViolated,
    /// Counterexample found or the iteration failed to converge: exit 3.
    Failed,
}

/// Raw-iteration report written by the `iterate` command.
#[derive(Debug, Clone, Serialize)]
pub struct IterateReport {
    pub converged: bool,
    pub point: Point,
    pub residual: f64,
    pub iterations_used: usize,
    pub monotone_violations: usize,
    pub diagnostics: Option<DiagnosticsReport>,
}

/// The `report.json` payload of a run.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ReportBody {
    Solver(SolverReport),
    Falsification(FalsificationReport),
    Iterate(IterateReport),
}

/// Everything a run produces; file writing is the caller's concern.
pub struct RunProducts {
    pub outcome: Outcome,
    pub body: ReportBody,
    /// Recorded trace with the engine's tuple dimension and the certified
    /// final residual, for the optional trace.csv.
    pub trace: Option<(IterationTrace, usize, f64)>,
}

fn iteration_config(
    keys: &crate::problem::IterationKeys,
    flags: &Flags,
    record_trace: bool,
) -> Result<IterationConfig, CliError> {
    let mut cfg = IterationConfig::new(
        flags.eps_step.unwrap_or(keys.eps_step),
        flags.eps_res.unwrap_or(keys.eps_res),
        flags.max_iter.unwrap_or(keys.max_iter),
    )?;
    cfg.record_trace = record_trace;
    Ok(cfg)
}

fn var_names(prefix: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn as_refs(names: &[String]) -> Vec<&str> {
    names.iter().map(|s| s.as_str()).collect()
}

fn kernel_closure(expr: CompiledExpr, n: usize) -> KernelFn {
    Arc::new(move |t: &[f64], s: &[f64]| {
        let mut slots = Vec::with_capacity(2 * n);
        slots.extend_from_slice(t);
        slots.extend_from_slice(s);
        expr.eval(&slots).unwrap_or(f64::NAN)
    })
}

fn forcing_closure(expr: CompiledExpr) -> ForcingFn {
    Arc::new(move |t: &[f64]| expr.eval(t).unwrap_or(f64::NAN))
}

fn integrand_closure(expr: CompiledExpr, n: usize) -> UrysohnIntegrandFn {
    Arc::new(move |t: &[f64], s: &[f64], u: f64| {
        let mut slots = Vec::with_capacity(2 * n + 1);
        slots.extend_from_slice(t);
        slots.extend_from_slice(s);
        slots.push(u);
        expr.eval(&slots).unwrap_or(f64::NAN)
    })
}

fn solve_outcome(report: &SolverReport, force: bool) -> Outcome {
    if !report.hypothesis_checks.all_ok() && !force {
        Outcome::HypothesisViolated
    } else if report.converged {
        Outcome::Pass
    } else {
        Outcome::Failed
    }
}

pub fn run_solve(file: &ProblemFile, flags: &Flags) -> Result<RunProducts, CliError> {
    match &file.kind {
        ProblemKind::Fredholm(spec) => run_solve_fredholm(spec, flags),
        ProblemKind::Urysohn(spec) => run_solve_urysohn(spec, flags),
        _ => Err(CliError::Usage(
            "'solve' expects a [fredholm] or [urysohn] problem file".into(),
        )),
    }
}

fn run_solve_fredholm(spec: &FredholmSpec, flags: &Flags) -> Result<RunProducts, CliError> {
    let n = spec.n_trunc;
    let mut names = var_names('t', n);
    names.extend(var_names('s', n));
    let kernel = kernel_closure(compile(&spec.kernel, &as_refs(&names))?, n);
    let forcing = forcing_closure(compile(&spec.forcing, &as_refs(&var_names('t', n)))?);
    let problem = FredholmProblem::new(n, kernel, forcing, spec.delta, spec.gamma)?;
    let rule = spec.quadrature.to_rule();
    let cfg = iteration_config(&spec.iteration, flags, flags.trace)?;
    let opts = SolverOptions {
        force: flags.force,
        run_oracle: flags.oracle,
        seed: flags.seed.unwrap_or(spec.seed),
        ..SolverOptions::default()
    };

    match solve_fredholm(&problem, &rule, &cfg, &opts) {
        Ok(mut report) => {
            let outcome = solve_outcome(&report, flags.force);
            let trace = report.trace.take().map(|mut t| {
                t.fill_beta_values(&GeraghtyFn::Constant(1.0 / spec.gamma));
                let residual = report.residual.unwrap_or(f64::NAN);
                (t, 1, residual)
            });
            Ok(RunProducts {
                outcome,
                body: ReportBody::Solver(report),
                trace,
            })
        }
        Err(CoreError::HypothesisViolated { .. }) => {
            // still publish the checks so the report names the violation
            let nodes = problem.collocation(&rule)?;
            let checks = fredholm_hypothesis_checks(&problem, &nodes)?;
            Ok(RunProducts {
                outcome: Outcome::HypothesisViolated,
                body: ReportBody::Solver(SolverReport {
                    converged: false,
                    iterations: 0,
                    residual: None,
                    solution: None,
                    hypothesis_checks: checks,
                    oracle_gap: None,
                    trace: None,
                }),
                trace: None,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn run_solve_urysohn(spec: &UrysohnSpec, flags: &Flags) -> Result<RunProducts, CliError> {
    let n = spec.n_trunc;
    let mut names = var_names('t', n);
    names.extend(var_names('s', n));
    names.push("u".into());
    let integrand = integrand_closure(compile(&spec.integrand, &as_refs(&names))?, n);
    let forcing = forcing_closure(compile(&spec.forcing, &as_refs(&var_names('t', n)))?);
    let problem = UrysohnProblem::new(
        n,
        spec.a,
        spec.b,
        integrand,
        forcing,
        spec.tau,
        spec.alpha,
    )?;
    let rule = spec.quadrature.to_rule();
    let cfg = iteration_config(&spec.iteration, flags, flags.trace)?;
    let opts = SolverOptions {
        force: flags.force,
        run_oracle: flags.oracle,
        seed: flags.seed.unwrap_or(spec.seed),
        u_range: spec.u_range,
        ..SolverOptions::default()
    };

    match solve_urysohn(&problem, &rule, &cfg, &opts) {
        Ok(mut report) => {
            let outcome = solve_outcome(&report, flags.force);
            let trace = report.trace.take().map(|mut t| {
                t.fill_beta_values(&GeraghtyFn::Constant(1.0 / spec.tau));
                let residual = report.residual.unwrap_or(f64::NAN);
                (t, 1, residual)
            });
            Ok(RunProducts {
                outcome,
                body: ReportBody::Solver(report),
                trace,
            })
        }
        Err(CoreError::HypothesisViolated { .. }) => {
            let nodes = problem.collocation(&rule)?;
            let checks = picardo_core::urysohn_hypothesis_checks(&problem, &nodes, &opts)?;
            Ok(RunProducts {
                outcome: Outcome::HypothesisViolated,
                body: ReportBody::Solver(SolverReport {
                    converged: false,
                    iterations: 0,
                    residual: None,
                    solution: None,
                    hypothesis_checks: checks,
                    oracle_gap: None,
                    trace: None,
                }),
                trace: None,
            })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run_check(file: &ProblemFile, flags: &Flags) -> Result<RunProducts, CliError> {
    let spec = match &file.kind {
        ProblemKind::ContractionCheck(spec) => spec,
        _ => {
            return Err(CliError::Usage(
                "'check' expects a [contraction-check] problem file".into(),
            ))
        }
    };
    run_check_spec(spec, flags)
}

fn run_check_spec(spec: &ContractionCheckSpec, flags: &Flags) -> Result<RunProducts, CliError> {
    let k = spec.kind.k();
    let names = var_names('x', k);
    let expr = compile(&spec.operator, &as_refs(&names))?;
    let op = move |q: &HatSequence| -> picardo_core::Result<Point> {
        let mut slots = Vec::with_capacity(k);
        for i in 1..=k {
            slots.push(q.element_at(i).as_scalar().ok_or_else(|| {
                CoreError::OperatorFailure("operator expressions act on scalars".into())
            })?);
        }
        let value = expr
            .eval(&slots)
            .map_err(|e| CoreError::OperatorFailure(e.to_string()))?;
        Ok(Point::Scalar(value))
    };
    let beta = match &spec.beta {
        Some(b) => b.to_fn()?,
        // the Banach/Kannan/Fisher kinds carry their own constant and ignore
        // the comparison function
        None => GeraghtyFn::constant(0.5).expect("0.5 lies in (0,1)"),
    };
    let cfg = SamplerConfig {
        n_samples: spec.n_samples,
        seed: flags.seed.unwrap_or(spec.seed),
        generator: PointGenerator::ScalarUniform {
            lo: spec.a,
            hi: spec.b,
        },
    };
    let report = falsify(&spec.kind, &op, &beta, &MetricSpace::AbsDiff, &cfg)?;
    let outcome = if report.passed() {
        Outcome::Pass
    } else {
        Outcome::Failed
    };
    Ok(RunProducts {
        outcome,
        body: ReportBody::Falsification(report),
        trace: None,
    })
}

pub fn run_iterate(file: &ProblemFile, flags: &Flags) -> Result<RunProducts, CliError> {
    let spec = match &file.kind {
        ProblemKind::OperatorIteration(spec) => spec,
        _ => {
            return Err(CliError::Usage(
                "'iterate' expects an [operator-iteration] problem file".into(),
            ))
        }
    };
    run_iterate_spec(spec, flags)
}

fn run_iterate_spec(spec: &OperatorIterationSpec, flags: &Flags) -> Result<RunProducts, CliError> {
    let k = spec.k;
    let names = var_names('x', k);
    let expr = compile(&spec.operator, &as_refs(&names))?;
    let base: Vec<Point> = match &spec.base {
        Some(points) => points.iter().map(|&x| Point::Scalar(x)).collect(),
        None => vec![Point::Scalar((spec.a + spec.b) / 2.0); k],
    };
    let space = MetricSpace::AbsDiff;
    // trace is always recorded here: iterates are scalars and the report
    // carries diagnostics
    let cfg = iteration_config(&spec.iteration, flags, true)?;

    let eval_window = move |slots: &[f64]| -> picardo_core::Result<Point> {
        let value = expr
            .eval(slots)
            .map_err(|e| CoreError::OperatorFailure(e.to_string()))?;
        Ok(Point::Scalar(value))
    };

    let result = match spec.engine {
        EngineKind::Finite => {
            let op = |window: &[Point]| {
                let slots: Vec<f64> = window
                    .iter()
                    .map(|p| p.as_scalar().expect("scalar base points"))
                    .collect();
                eval_window(&slots)
            };
            k_picard(op, &base, &space, &cfg)?
        }
        EngineKind::Infinite => {
            let op = |q: &HatSequence| {
                let slots: Vec<f64> = (1..=k)
                    .map(|i| q.element_at(i).as_scalar().expect("scalar base points"))
                    .collect();
                eval_window(&slots)
            };
            infinite_k_picard(op, &base, &space, &cfg)?
        }
    };

    let mut trace = result.trace.clone().expect("trace recording was enabled");
    if let Some(beta_spec) = &spec.beta {
        trace.fill_beta_values(&beta_spec.to_fn()?);
    }
    let diagnostics = diagnose(&trace, &space).ok();
    let outcome = if result.converged {
        Outcome::Pass
    } else {
        Outcome::Failed
    };
    let report = IterateReport {
        converged: result.converged,
        point: result.point,
        residual: result.residual,
        iterations_used: result.iterations_used,
        monotone_violations: result.monotone_violations,
        diagnostics,
    };
    Ok(RunProducts {
        outcome,
        body: ReportBody::Iterate(report),
        trace: Some((trace, k, result.residual)),
    })
}
