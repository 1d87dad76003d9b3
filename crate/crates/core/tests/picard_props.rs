//! Engine properties: monotone step decrease for contraction-passing
//! operators, the Kannan-style ratio bound, trace gauge cross-checks, and
//! determinism.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use picardo_core::{
    falsify, hat, infinite_k_picard, k_picard, m_k, ContractionKind, GeraghtyFn, HatSequence,
    IterationConfig, MetricSpace, Point, PointGenerator, Result, SamplerConfig,
};

fn s(x: f64) -> Point {
    Point::Scalar(x)
}

fn scaled_projection(c: f64, k: usize) -> impl Fn(&HatSequence) -> Result<Point> + Copy {
    move |q: &HatSequence| Ok(s(c * q.element_at(k).as_scalar().unwrap()))
}

#[test]
fn hk_passing_operators_yield_strictly_decreasing_steps() {
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-10, 1e-10, 2000)
        .unwrap()
        .with_trace();
    let sampler = SamplerConfig {
        n_samples: 1000,
        seed: 8,
        generator: PointGenerator::ScalarUniform { lo: 0.0, hi: 1.0 },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 1..=3usize {
        let c = 0.55;
        let op = scaled_projection(c, k);
        let beta = GeraghtyFn::constant(0.8).unwrap();
        let report = falsify(&ContractionKind::Hk { k }, &op, &beta, &space, &sampler).unwrap();
        assert!(report.passed());

        for _ in 0..20 {
            let base: Vec<Point> = (0..k).map(|_| s(rng.gen_range(0.01..1.0))).collect();
            let result = infinite_k_picard(op, &base, &space, &cfg).unwrap();
            assert_eq!(result.monotone_violations, 0);
            assert!(result.converged);
        }
    }
}

#[test]
fn kannan_style_ratio_bound_holds_along_traces() {
    // If the operator passes the extended Kannan-style check with constant b,
    // consecutive step distances satisfy ratio <= b / (2 - b): the inequality
    // applied to consecutive iterates gives
    // d_{n+1} <= (b/2)(d_n + d_{n+1}).
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-12, 1e-12, 4000)
        .unwrap()
        .with_trace();
    let sampler = SamplerConfig {
        n_samples: 2000,
        seed: 17,
        generator: PointGenerator::ScalarUniform { lo: 0.0, hi: 1.0 },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for (b, k) in [(0.2, 1usize), (0.5, 2), (0.8, 3)] {
        // largest scaled projection passing with constant b is c = b/(2+b)
        let c = 0.9 * b / (2.0 + b);
        let op = scaled_projection(c, k);
        let beta = GeraghtyFn::constant(b).unwrap();
        let report = falsify(
            &ContractionKind::ExtKannanGeraghtyHk { k },
            &op,
            &beta,
            &space,
            &sampler,
        )
        .unwrap();
        assert!(report.passed(), "c={c}, b={b}: {:?}", report.counterexample);

        let bound = b / (2.0 - b) + 1e-9;
        for _ in 0..10 {
            let base: Vec<Point> = (0..k).map(|_| s(rng.gen_range(0.05..1.0))).collect();
            let result = infinite_k_picard(op, &base, &space, &cfg).unwrap();
            let steps = &result.trace.as_ref().unwrap().step_distances;
            for w in steps.windows(2) {
                if w[0] > 1e-14 {
                    assert!(
                        w[1] / w[0] <= bound,
                        "ratio {} exceeds bound {bound}",
                        w[1] / w[0]
                    );
                }
            }
        }
    }
}

#[test]
fn trace_gauge_matches_a_direct_gauge_evaluation() {
    // The recorded per-step gauge must equal the gauge computed from scratch
    // on the consecutive iterate windows.
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-9, 1e-9, 500).unwrap().with_trace();
    let k = 2usize;
    let op = |q: &HatSequence| -> Result<Point> {
        let x1 = q.element_at(1).as_scalar().unwrap();
        let x2 = q.element_at(2).as_scalar().unwrap();
        Ok(s(0.3 * x2 + 0.15 * x1))
    };
    let base = [s(0.9), s(0.2)];
    let result = infinite_k_picard(op, &base, &space, &cfg).unwrap();
    let trace = result.trace.unwrap();
    let mk = trace.mk_values.as_ref().unwrap();
    assert_eq!(mk.len(), trace.step_distances.len().saturating_sub(1));

    for (j, &recorded) in mk.iter().enumerate() {
        let window_a = &trace.iterates[j..j + k];
        let window_b = &trace.iterates[j + 1..j + 1 + k];
        let seq_a = hat(window_a[..k - 1].to_vec(), window_a[k - 1].clone()).unwrap();
        let seq_b = hat(window_b[..k - 1].to_vec(), window_b[k - 1].clone()).unwrap();
        let direct = m_k(&op, &seq_a, &seq_b, k, &space).unwrap();
        assert_eq!(recorded.to_bits(), direct.to_bits(), "step {j}");
    }
}

#[test]
fn beta_values_fill_from_the_gauge() {
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-9, 1e-9, 500).unwrap().with_trace();
    let op = scaled_projection(0.5, 1);
    let result = infinite_k_picard(op, &[s(1.0)], &space, &cfg).unwrap();
    let mut trace = result.trace.unwrap();
    let beta = GeraghtyFn::Reciprocal1Plus;
    trace.fill_beta_values(&beta);
    let mk = trace.mk_values.as_ref().unwrap();
    let bv = trace.beta_values.as_ref().unwrap();
    assert_eq!(mk.len(), bv.len());
    for (m, b) in mk.iter().zip(bv) {
        assert_eq!(b.to_bits(), beta.eval(*m).to_bits());
    }
}

#[test]
fn engines_are_deterministic() {
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-11, 1e-11, 1000).unwrap().with_trace();
    let op = |w: &[Point]| -> Result<Point> {
        let (a, b) = (w[0].as_scalar().unwrap(), w[1].as_scalar().unwrap());
        Ok(s(0.25 * a + 0.35 * b + 0.01))
    };
    let base = [s(0.4), s(0.8)];
    let r1 = k_picard(op, &base, &space, &cfg).unwrap();
    let r2 = k_picard(op, &base, &space, &cfg).unwrap();
    assert_eq!(r1, r2);
}

#[test]
fn finite_and_sequence_engines_agree_on_seeded_cases() {
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-11, 1e-11, 2000).unwrap().with_trace();
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    for _ in 0..50 {
        let k = rng.gen_range(1..=3usize);
        let coeffs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..0.9 / k as f64)).collect();
        let shift = rng.gen_range(0.0..0.1);
        let base: Vec<Point> = (0..k).map(|_| s(rng.gen_range(0.0..1.0))).collect();

        let cf = coeffs.clone();
        let finite = move |w: &[Point]| -> Result<Point> {
            let mut acc = shift;
            for (c, p) in cf.iter().zip(w) {
                acc += c * p.as_scalar().unwrap();
            }
            Ok(s(acc))
        };
        let cs = coeffs.clone();
        let sequential = move |q: &HatSequence| -> Result<Point> {
            let mut acc = shift;
            for (i, c) in cs.iter().enumerate() {
                acc += c * q.element_at(i + 1).as_scalar().unwrap();
            }
            Ok(s(acc))
        };

        let r1 = k_picard(finite, &base, &space, &cfg).unwrap();
        let r2 = infinite_k_picard(sequential, &base, &space, &cfg).unwrap();
        assert_eq!(r1, r2);
    }
}

#[test]
fn residual_recheck_holds_for_converged_runs() {
    let space = MetricSpace::AbsDiff;
    let cfg = IterationConfig::new(1e-10, 1e-10, 1000).unwrap();
    let op = |w: &[Point]| -> Result<Point> {
        Ok(s(0.6 * w[0].as_scalar().unwrap() + 0.2))
    };
    let result = k_picard(op, &[s(0.0)], &space, &cfg).unwrap();
    assert!(result.converged);
    // independent recheck of the diagonal residual
    let u = result.point.as_scalar().unwrap();
    let image = 0.6 * u + 0.2;
    assert!((u - image).abs() <= 1e-10);
    assert!((u - 0.5).abs() <= 1e-9);
}
