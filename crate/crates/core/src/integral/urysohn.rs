//! Nonlinear second-kind integral equation `u = f + integral P(t, s, u(s))`
//! on `[a,b]^n`, solved by successive approximation under the weighted sup
//! metric, with a damped-Newton dense collocation oracle.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hat::HatSequence;
use crate::metric::{MetricSpace, Point};
use crate::picard::{infinite_k_picard, IterationConfig};
use crate::quadrature::{pairwise_sum, NodeSet, QuadratureRule};

use super::fredholm::ForcingFn;
use super::{
    build_nodes, constant_beta_check, iterate_contraction_check, HypothesisCheck,
    HypothesisChecks, SolverOptions, SolverReport,
};

/// Integrand `P(t, s, u(s))`.
pub type UrysohnIntegrandFn = Arc<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;

/// A truncated product-domain nonlinear integral equation on `[a,b]^n_trunc`.
#[derive(Clone)]
pub struct UrysohnProblem {
    pub n_trunc: usize,
    pub a: f64,
    pub b: f64,
    pub integrand: UrysohnIntegrandFn,
    pub forcing: ForcingFn,
    /// Lipschitz denominator: `|P(t,s,u1) - P(t,s,u2)| <= |u1 - u2| / tau`.
    pub tau: f64,
    /// Metric weight parameter in (0, 1]; the weight is `exp(-asin(alpha))`.
    pub alpha: f64,
}

impl fmt::Debug for UrysohnProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UrysohnProblem")
            .field("n_trunc", &self.n_trunc)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("tau", &self.tau)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

impl UrysohnProblem {
    pub fn new(
        n_trunc: usize,
        a: f64,
        b: f64,
        integrand: UrysohnIntegrandFn,
        forcing: ForcingFn,
        tau: f64,
        alpha: f64,
    ) -> Result<Self> {
        if n_trunc == 0 {
            return Err(Error::InvalidParameter(
                "truncation dimension must be at least 1".into(),
            ));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "invalid domain [{a}, {b}]"
            )));
        }
        let volume = (b - a).powi(n_trunc as i32);
        if !(tau > volume) {
            return Err(Error::InvalidParameter(format!(
                "tau must exceed the domain volume {volume}, got {tau}"
            )));
        }
        // validates alpha in (0, 1]
        MetricSpace::weighted_sup(alpha)?;
        Ok(UrysohnProblem {
            n_trunc,
            a,
            b,
            integrand,
            forcing,
            tau,
            alpha,
        })
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(self.a, self.b); self.n_trunc]
    }

    pub fn collocation(&self, rule: &QuadratureRule) -> Result<NodeSet> {
        build_nodes(rule, &self.bounds())
    }

    /// The weighted sup metric this problem is solved under.
    pub fn space(&self) -> MetricSpace {
        MetricSpace::weighted_sup(self.alpha).expect("validated at construction")
    }

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

/// One application of the nonlinear operator:
/// `(Tu)(t_i) = f(t_i) + sum_j w_j P(t_i, s_j, u_j)`.
pub fn apply_urysohn(u: &Point, p: &UrysohnProblem, nodes: &NodeSet) -> Result<Point> {
    let uv = grid_values(u, nodes)?;
    let mut out = Vec::with_capacity(nodes.len());
    let mut terms = vec![0.0; nodes.len()];
    for (i, t) in nodes.grid.nodes.iter().enumerate() {
        for (j, s) in nodes.grid.nodes.iter().enumerate() {
            terms[j] = nodes.weights[j] * (p.integrand)(t, s, uv[j]);
        }
        let val = (p.forcing)(t) + pairwise_sum(&terms);
        if !val.is_finite() {
            return Err(Error::NonFinite(format!("operator value at node {i} {t:?}")));
        }
        out.push(val);
    }
    Point::on_grid(out, Arc::clone(&nodes.grid))
}

/// Sampled Lipschitz check on random `(t, s, u1, u2)` quadruples plus the
/// constant-factor check on `1/tau`.
pub fn urysohn_hypothesis_checks(
    p: &UrysohnProblem,
    nodes: &NodeSet,
    opts: &SolverOptions,
) -> Result<HypothesisChecks> {
    let (u_lo, u_hi) = match opts.u_range {
        Some(range) => range,
        None => {
            let f = p.forcing_on(nodes)?;
            let lo = f.samples().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = f
                .samples()
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            (lo - 1.0, hi + 1.0)
        }
    };
    if !(u_lo < u_hi) {
        return Err(Error::InvalidParameter(format!(
            "invalid Lipschitz value range [{u_lo}, {u_hi}]"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let bounds = p.bounds();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at: Option<Vec<f64>> = None;
    for _ in 0..opts.check_samples.max(1) {
        let t: Vec<f64> = bounds.iter().map(|&(a, b)| rng.gen_range(a..=b)).collect();
        let s: Vec<f64> = bounds.iter().map(|&(a, b)| rng.gen_range(a..=b)).collect();
        let u1 = rng.gen_range(u_lo..=u_hi);
        let mut u2 = rng.gen_range(u_lo..=u_hi);
        while (u1 - u2).abs() < 1e-9 * (1.0 + u_hi.abs().max(u_lo.abs())) {
            u2 = rng.gen_range(u_lo..=u_hi);
        }
        let p1 = (p.integrand)(&t, &s, u1);
        let p2 = (p.integrand)(&t, &s, u2);
        if !p1.is_finite() || !p2.is_finite() {
            return Err(Error::NonFinite(format!(
                "integrand during Lipschitz scan at t={t:?}, s={s:?}"
            )));
        }
        let ratio = (p1 - p2).abs() / (u1 - u2).abs();
        if ratio > worst {
            worst = ratio;
            let mut at = t;
            at.extend_from_slice(&s);
            at.push(u1);
            at.push(u2);
            worst_at = Some(at);
        }
    }

    Ok(HypothesisChecks {
        kernel_bound: None,
        lipschitz: Some(HypothesisCheck {
            ok: worst <= 1.0 / p.tau + super::BOUND_CHECK_TOL,
            worst,
            samples: opts.check_samples.max(1),
            worst_at,
        }),
        beta: constant_beta_check(1.0 / p.tau),
        iterate_contraction: None,
    })
}

/// Successive approximation from `u_0 = f` under the weighted sup metric.
pub fn solve_urysohn(
    p: &UrysohnProblem,
    rule: &QuadratureRule,
    cfg: &IterationConfig,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    let nodes = p.collocation(rule)?;
    let mut checks = urysohn_hypothesis_checks(p, &nodes, opts)?;
    if !opts.force {
        if let Some(lc) = &checks.lipschitz {
            if !lc.ok {
                return Err(Error::HypothesisViolated {
                    condition: format!("Lipschitz bound |P(..,u1)-P(..,u2)| <= |u1-u2|/{}", p.tau),
                    worst: lc.worst,
                });
            }
        }
        if !checks.beta.ok {
            return Err(Error::HypothesisViolated {
                condition: "comparison factor 1/tau in [0, 1)".into(),
                worst: checks.beta.worst,
            });
        }
    }

    let u0 = p.forcing_on(&nodes)?;
    let space = p.space();
    let op = |seq: &HatSequence| apply_urysohn(seq.element_at(1), p, &nodes);
    let mut inner_cfg = cfg.clone();
    inner_cfg.record_trace = true;

    let result = infinite_k_picard(op, &[u0], &space, &inner_cfg)?;
    let trace = result.trace.expect("trace recording was enabled");
    checks.iterate_contraction = Some(iterate_contraction_check(&trace.step_distances));

    let image = apply_urysohn(&result.point, p, &nodes)?;
    let residual = space.distance(&result.point, &image)?;

    let oracle_gap = if opts.run_oracle {
        let dense = oracle_urysohn_dense(p, &nodes, opts.oracle_cap)?;
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

/// Residual sup-norm tolerance of the dense Newton oracle.
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

/// Damped-Newton dense solve of the collocation system
/// `U_i = f(t_i) + sum_j w_j P(t_i, s_j, U_j)`, independent of the iteration
/// path. The Jacobian uses central finite differences in the third argument.
pub fn oracle_urysohn_dense(p: &UrysohnProblem, nodes: &NodeSet, cap: usize) -> Result<Point> {
    if !nodes.deterministic {
        return Err(Error::InvalidParameter(
            "dense oracle requires a deterministic quadrature rule".into(),
        ));
    }
    let n = nodes.len();
    if n > cap {
        return Err(Error::CapExceeded { nodes: n, cap });
    }

    let f_vals: Vec<f64> = nodes.grid.nodes.iter().map(|t| (p.forcing)(t)).collect();
    let residual = |u: &DVector<f64>| -> Result<DVector<f64>> {
        let mut g = DVector::<f64>::zeros(n);
        let mut terms = vec![0.0; n];
        for i in 0..n {
            let t = &nodes.grid.nodes[i];
            for j in 0..n {
                terms[j] = nodes.weights[j] * (p.integrand)(t, &nodes.grid.nodes[j], u[j]);
            }
            g[i] = u[i] - f_vals[i] - pairwise_sum(&terms);
            if !g[i].is_finite() {
                return Err(Error::NonFinite(format!("collocation residual at node {i}")));
            }
        }
        Ok(g)
    };

    let mut u = DVector::<f64>::from_vec(f_vals.clone());
    let mut g = residual(&u)?;
    for iter in 0..NEWTON_MAX_ITER {
        let g_norm = g.amax();
        if g_norm <= NEWTON_TOL {
            let values: Vec<f64> = u.iter().copied().collect();
            return Point::on_grid(values, Arc::clone(&nodes.grid));
        }

        let mut jac = DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + u[j].abs());
            for i in 0..n {
                let t = &nodes.grid.nodes[i];
                let s = &nodes.grid.nodes[j];
                let dp =
                    ((p.integrand)(t, s, u[j] + h) - (p.integrand)(t, s, u[j] - h)) / (2.0 * h);
                jac[(i, j)] -= nodes.weights[j] * dp;
            }
        }

        let lu = jac.lu();
        let cond_estimate = super::diag_condition_estimate(&lu.u());
        let delta = lu
            .solve(&(-&g))
            .ok_or(Error::SingularSystem { cond_estimate })?;

        // damping: halve the step until the residual norm decreases
        let mut lambda = 1.0;
        loop {
            let trial = &u + lambda * &delta;
            let g_trial = residual(&trial)?;
            if g_trial.amax() < g_norm || lambda < 1e-10 {
                u = trial;
                g = g_trial;
                break;
            }
            lambda /= 2.0;
        }
        let _ = iter;
    }

    if g.amax() <= NEWTON_TOL {
        let values: Vec<f64> = u.iter().copied().collect();
        return Point::on_grid(values, Arc::clone(&nodes.grid));
    }
    Err(Error::Diverged {
        iteration: NEWTON_MAX_ITER,
        step: g.amax(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(m: usize) -> QuadratureRule {
        QuadratureRule::GaussLegendre { nodes_per_axis: m }
    }

    fn sine_problem() -> UrysohnProblem {
        UrysohnProblem::new(
            1,
            0.0,
            1.0,
            Arc::new(|t: &[f64], s: &[f64], u: f64| u.sin() * t[0] * s[0] / 10.0),
            Arc::new(|t: &[f64]| t[0]),
            10.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_integrand_returns_forcing() {
        let p = UrysohnProblem::new(
            1,
            0.0,
            1.0,
            Arc::new(|_: &[f64], _: &[f64], _: f64| 0.0),
            Arc::new(|t: &[f64]| 1.0 + t[0]),
            2.0,
            0.5,
        )
        .unwrap();
        let nodes = p.collocation(&gauss(8)).unwrap();
        let f = p.forcing_on(&nodes).unwrap();
        let tu = apply_urysohn(&f, &p, &nodes).unwrap();
        assert_eq!(tu.samples(), f.samples());
    }

    #[test]
    fn constant_integrand_example() {
        // P = sin(u)/10, u = pi/2 everywhere: (Tu)(t) = 0.1 at every node.
        let p = UrysohnProblem::new(
            1,
            0.0,
            1.0,
            Arc::new(|_: &[f64], _: &[f64], u: f64| u.sin() / 10.0),
            Arc::new(|_: &[f64]| 0.0),
            10.0,
            1.0,
        )
        .unwrap();
        let nodes = p.collocation(&gauss(8)).unwrap();
        let u = Point::on_grid(
            vec![std::f64::consts::FRAC_PI_2; nodes.len()],
            Arc::clone(&nodes.grid),
        )
        .unwrap();
        let tu = apply_urysohn(&u, &p, &nodes).unwrap();
        for v in tu.samples() {
            assert!((v - 0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_integrand_reproduces_the_linear_solver_bitwise() {
        use super::super::fredholm::{apply_fredholm, FredholmProblem};
        let delta = 0.5;
        let fp = FredholmProblem::new(
            1,
            Arc::new(move |t: &[f64], s: &[f64]| delta * t[0] * s[0]),
            Arc::new(|t: &[f64]| t[0]),
            delta,
            2.0,
        )
        .unwrap();
        let up = UrysohnProblem::new(
            1,
            0.0,
            1.0,
            Arc::new(move |t: &[f64], s: &[f64], u: f64| (delta * t[0] * s[0]) * u),
            Arc::new(|t: &[f64]| t[0]),
            1.5,
            1.0,
        )
        .unwrap();
        let nodes = fp.collocation(&gauss(12)).unwrap();
        let u: Vec<f64> = nodes.grid.nodes.iter().map(|t| (0.3 * t[0]).cos()).collect();
        let point = Point::on_grid(u, Arc::clone(&nodes.grid)).unwrap();
        let lin = apply_fredholm(&point, &fp, &nodes).unwrap();
        let nl = apply_urysohn(&point, &up, &nodes).unwrap();
        for (a, b) in lin.samples().iter().zip(nl.samples()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn sine_solve_converges_and_matches_newton() {
        let p = sine_problem();
        let cfg = IterationConfig::new(1e-11, 1e-11, 200).unwrap();
        let opts = SolverOptions {
            run_oracle: true,
            ..SolverOptions::default()
        };
        let report = solve_urysohn(&p, &gauss(32), &cfg, &opts).unwrap();
        assert!(report.converged);
        assert!(report.residual.unwrap() <= 1e-10);
        assert!(report.oracle_gap.unwrap() <= 1e-8);
        assert!(report.hypothesis_checks.all_ok());
    }

    #[test]
    fn constant_forcing_with_zero_integrand_solves_in_one_step() {
        let p = UrysohnProblem::new(
            1,
            0.0,
            1.0,
            Arc::new(|_: &[f64], _: &[f64], _: f64| 0.0),
            Arc::new(|_: &[f64]| 0.75),
            2.0,
            1.0,
        )
        .unwrap();
        let cfg = IterationConfig::default();
        let report = solve_urysohn(&p, &gauss(8), &cfg, &SolverOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert!(report
            .solution
            .unwrap()
            .samples()
            .iter()
            .all(|&v| v == 0.75));
    }

    #[test]
    fn unbounded_derivative_fails_the_lipschitz_check() {
        // P = u^2 over u in [0, 10]: difference quotients reach |u1 + u2| ~ 20.
        let p = UrysohnProblem::new(
            1,
            0.0,
            1.0,
            Arc::new(|_: &[f64], _: &[f64], u: f64| u * u),
            Arc::new(|t: &[f64]| t[0]),
            10.0,
            1.0,
        )
        .unwrap();
        let nodes = p.collocation(&gauss(8)).unwrap();
        let opts = SolverOptions {
            u_range: Some((0.0, 10.0)),
            seed: 11,
            ..SolverOptions::default()
        };
        let checks = urysohn_hypothesis_checks(&p, &nodes, &opts).unwrap();
        let lc = checks.lipschitz.unwrap();
        assert!(!lc.ok);
        assert!(lc.worst > 1.0 / p.tau);
        assert!(lc.worst <= 20.0 + 1e-9);

        let cfg = IterationConfig::default();
        let err = solve_urysohn(&p, &gauss(8), &cfg, &opts);
        assert!(matches!(err, Err(Error::HypothesisViolated { .. })));
    }

    #[test]
    fn tau_must_exceed_the_domain_volume() {
        let err = UrysohnProblem::new(
            1,
            0.0,
            2.0,
            Arc::new(|_: &[f64], _: &[f64], _: f64| 0.0),
            Arc::new(|_: &[f64]| 0.0),
            1.5,
            1.0,
        );
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }
}
