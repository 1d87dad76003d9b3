//! Sampling-based search for counterexamples to contraction inequalities.
//!
//! The inequalities quantify over the whole space, so they can only be
//! falsified, never proved. A pass report states how many samples were tried;
//! a fail report carries the first counterexample in a fixed deterministic
//! order (boundary grid first, then seeded pseudo-random pairs).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::contraction::{lhs_rhs, ArgShape, ContractionKind, TupleArg};
use crate::error::{Error, Result};
use crate::geraghty::GeraghtyFn;
use crate::hat::{hat, SeqOperator};
use crate::metric::{MetricSpace, Point};

/// Absolute slack on `lhs - rhs` before a sample counts as a counterexample.
pub const COUNTEREXAMPLE_TOL: f64 = 1e-12;

/// How sample points are drawn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PointGenerator {
    /// Scalar entries uniform in `[lo, hi]`.
    ScalarUniform { lo: f64, hi: f64 },
}

/// Falsifier configuration; the seed makes runs bit-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub generator: PointGenerator,
}

/// A sample where the inequality failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub u: TupleArg,
    pub v: TupleArg,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of a falsification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsificationReport {
    pub kind: ContractionKind,
    pub samples_tried: usize,
    pub counterexample: Option<Counterexample>,
    /// Largest `lhs/rhs` observed; stays below 1 on a genuine contraction.
    pub max_ratio: f64,
}

impl FalsificationReport {
    /// True when no counterexample was found.
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Evaluates the kind's inequality on a fixed boundary grid plus `n_samples`
/// seeded pseudo-random argument pairs, returning the first sample with
/// `lhs > rhs + tol`, or a pass report with the largest observed ratio.
pub fn falsify<F: SeqOperator>(
    kind: &ContractionKind,
    op: &F,
    beta: &GeraghtyFn,
    space: &MetricSpace,
    cfg: &SamplerConfig,
) -> Result<FalsificationReport> {
    kind.validate()?;
    let PointGenerator::ScalarUniform { lo, hi } = cfg.generator;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sample interval [{lo}, {hi}] is not an interval"
        )));
    }
    let k = kind.k();

    let mut samples_tried = 0usize;
    let mut max_ratio: f64 = 0.0;

    let mut check = |u: TupleArg, v: TupleArg| -> Result<Option<Counterexample>> {
        samples_tried += 1;
        let (lhs, rhs) = lhs_rhs(kind, op, beta, &u, &v, space).map_err(|e| match e {
            Error::OperatorFailure(msg) => Error::OperatorFailure(format!(
                "{msg} (sample {samples_tried}: u = {u:?}, v = {v:?})"
            )),
            other => other,
        })?;
        if lhs > rhs + COUNTEREXAMPLE_TOL {
            return Ok(Some(Counterexample { u, v, lhs, rhs }));
        }
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
        Ok(None)
    };

    // Fixed boundary grid: every ordered pair of tuples with entries drawn
    // from {lo, mid, hi}, falling back to {lo, hi} when 9^k gets large.
    let fits = |base: usize| base.checked_pow(k as u32).is_some_and(|n| n <= 4096);
    let levels: Vec<f64> = if fits(9) {
        vec![lo, 0.5 * (lo + hi), hi]
    } else if fits(4) {
        vec![lo, hi]
    } else {
        Vec::new()
    };
    if !levels.is_empty() {
        let tuples = enumerate_tuples(&levels, k);
        for tu in &tuples {
            for tv in &tuples {
                if let Some(ce) = check(
                    make_arg(kind.expected_shape(), tu)?,
                    make_arg(kind.expected_shape(), tv)?,
                )? {
                    return Ok(FalsificationReport {
                        kind: kind.clone(),
                        samples_tried,
                        counterexample: Some(ce),
                        max_ratio,
                    });
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.n_samples {
        let tu: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..=hi)).collect();
        let tv: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..=hi)).collect();
        if let Some(ce) = check(
            make_arg(kind.expected_shape(), &tu)?,
            make_arg(kind.expected_shape(), &tv)?,
        )? {
            return Ok(FalsificationReport {
                kind: kind.clone(),
                samples_tried,
                counterexample: Some(ce),
                max_ratio,
            });
        }
    }

    Ok(FalsificationReport {
        kind: kind.clone(),
        samples_tried,
        counterexample: None,
        max_ratio,
    })
}

fn enumerate_tuples(levels: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * levels.len());
        for stem in &out {
            for &x in levels {
                let mut t = stem.clone();
                t.push(x);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn make_arg(shape: ArgShape, entries: &[f64]) -> Result<TupleArg> {
    let points: Vec<Point> = entries.iter().map(|&x| Point::Scalar(x)).collect();
    Ok(match shape {
        ArgShape::Point => TupleArg::Point(points[0].clone()),
        ArgShape::Tuple => TupleArg::Tuple(points),
        ArgShape::Seq => {
            let mut prefix = points;
            let tail = prefix.pop().expect("k >= 1");
            TupleArg::Seq(hat(prefix, tail)?)
        }
    })
}
