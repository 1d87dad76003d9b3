//! Contraction kinds, the extended comparison gauge, and inequality evaluation.
//!
//! Each [`ContractionKind`] names one contraction inequality `d(Tu, Tv) <= rhs`.
//! [`lhs_rhs`] evaluates both sides on a concrete pair of arguments and
//! [`m_k`] computes the gauge that controls the `Hk` family: the maximum of
//! three suprema of distances over tail indices. On eventually-constant
//! sequences every supremum is attained at or before the stabilization index,
//! so the gauge is computed by a finite, exact scan.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geraghty::GeraghtyFn;
use crate::hat::{apply_operator, hat, HatSequence, SeqOperator};
use crate::metric::{MetricSpace, Point};

/// The contraction inequality being checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ContractionKind {
    /// `d(Tu, Tv) <= c d(u, v)`, `c` in (0, 1).
    Banach { c: f64 },
    /// `d(Tu, Tv) <= beta(d(u, v)) d(u, v)`.
    Geraghty,
    /// `d(Tu, Tv) <= c (d(Tu, u) + d(Tv, v))`, `c` in (0, 1/2).
    Kannan { c: f64 },
    /// `d(Tu, Tv) <= c (d(Tu, v) + d(Tv, u))`, `c` in (0, 1/2).
    Fisher { c: f64 },
    /// Alias for `KannanGeraghtyDimK { k: 1 }` on single points.
    KannanGeraghtySelf,
    /// `d(Tu, Tv) <= beta(m) m` with `m` the gauge of [`m_k`].
    Hk { k: usize },
    /// Kannan-style right-hand side on finite `k`-tuples.
    KannanGeraghtyDimK { k: usize },
    /// Kannan-style right-hand side on sequences hatted at `k`.
    ExtKannanGeraghtyHk { k: usize },
    /// Fisher-style right-hand side on finite `k`-tuples.
    FisherGeraghtyDimK { k: usize },
    /// Fisher-style right-hand side on sequences hatted at `k`.
    ExtFisherGeraghtyHk { k: usize },
}

impl ContractionKind {
    /// Validates parameter ranges: `k >= 1`, `c` in (0, 1) for Banach and in
    /// (0, 1/2) for Kannan and Fisher.
    pub fn validate(&self) -> Result<()> {
        match self {
            ContractionKind::Banach { c } => {
                if !(*c > 0.0 && *c < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Banach constant must lie in (0, 1), got {c}"
                    )));
                }
            }
            ContractionKind::Kannan { c } | ContractionKind::Fisher { c } => {
                if !(*c > 0.0 && *c < 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "Kannan/Fisher constant must lie in (0, 1/2), got {c}"
                    )));
                }
            }
            ContractionKind::Hk { k }
            | ContractionKind::KannanGeraghtyDimK { k }
            | ContractionKind::ExtKannanGeraghtyHk { k }
            | ContractionKind::FisherGeraghtyDimK { k }
            | ContractionKind::ExtFisherGeraghtyHk { k } => {
                if *k == 0 {
                    return Err(Error::InvalidParameter("k must be at least 1".into()));
                }
            }
            ContractionKind::Geraghty | ContractionKind::KannanGeraghtySelf => {}
        }
        Ok(())
    }

    /// The tuple dimension the inequality quantifies over.
    pub fn k(&self) -> usize {
        match self {
            ContractionKind::Banach { .. }
            | ContractionKind::Geraghty
            | ContractionKind::Kannan { .. }
            | ContractionKind::Fisher { .. }
            | ContractionKind::KannanGeraghtySelf => 1,
            ContractionKind::Hk { k }
            | ContractionKind::KannanGeraghtyDimK { k }
            | ContractionKind::ExtKannanGeraghtyHk { k }
            | ContractionKind::FisherGeraghtyDimK { k }
            | ContractionKind::ExtFisherGeraghtyHk { k } => *k,
        }
    }

    /// Expected argument shape for [`lhs_rhs`].
    pub fn expected_shape(&self) -> ArgShape {
        match self {
            ContractionKind::Banach { .. }
            | ContractionKind::Geraghty
            | ContractionKind::Kannan { .. }
            | ContractionKind::Fisher { .. }
            | ContractionKind::KannanGeraghtySelf => ArgShape::Point,
            ContractionKind::KannanGeraghtyDimK { .. }
            | ContractionKind::FisherGeraghtyDimK { .. } => ArgShape::Tuple,
            ContractionKind::Hk { .. }
            | ContractionKind::ExtKannanGeraghtyHk { .. }
            | ContractionKind::ExtFisherGeraghtyHk { .. } => ArgShape::Seq,
        }
    }
}

/// Shape of a contraction argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgShape {
    Point,
    Tuple,
    Seq,
}

/// One side of a contraction inequality: a single point for the classic
/// one-dimensional kinds, a finite `k`-tuple for the dimension-`k` kinds, or
/// an eventually-constant sequence for the extended kinds.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TupleArg {
    Point(Point),
    Tuple(Vec<Point>),
    Seq(HatSequence),
}

impl TupleArg {
    /// Converts the argument into the sequence hatted at `k`, validating its
    /// shape and arity against the kind.
    fn to_hatted(&self, kind: &ContractionKind) -> Result<HatSequence> {
        let k = kind.k();
        match (kind.expected_shape(), self) {
            (ArgShape::Point, TupleArg::Point(p)) => Ok(HatSequence::constant(p.clone())),
            (ArgShape::Tuple, TupleArg::Tuple(pts)) => {
                if pts.len() != k {
                    return Err(Error::ArityMismatch(format!(
                        "kind expects {k} points, got {}",
                        pts.len()
                    )));
                }
                let mut prefix = pts.clone();
                let tail = prefix.pop().expect("k >= 1");
                hat(prefix, tail)
            }
            // The extended inequalities only ever evaluate tuples hatted at k,
            // so a sequence argument is projected onto its hat at k.
            (ArgShape::Seq, TupleArg::Seq(s)) => Ok(s.rehat(k)),
            (expected, got) => Err(Error::ArityMismatch(format!(
                "kind expects a {expected:?} argument, got {got:?}"
            ))),
        }
    }
}

/// The comparison gauge controlling the `Hk` family:
///
/// `max { sup_{l>=k} d(u_l, v_l), sup_{l>=k} d(u_l, T(rehat(u, l))),
///        sup_{l>=k} d(v_l, T(rehat(v, l))) }`.
///
/// Each supremum of an eventually-constant sequence is attained at some
/// `l <= max(k, stabilization(u), stabilization(v))`, so the scan below is
/// finite and exact.
pub fn m_k<F: SeqOperator>(
    op: &F,
    u: &HatSequence,
    v: &HatSequence,
    k: usize,
    space: &MetricSpace,
) -> Result<f64> {
    assert!(k >= 1, "k is 1-based");
    let l_max = k
        .max(u.stabilization_index())
        .max(v.stabilization_index());
    let mut best: f64 = 0.0;
    for l in k..=l_max {
        let ul = u.element_at(l);
        let vl = v.element_at(l);
        let tu = apply_operator(op, &u.rehat(l))?;
        let tv = apply_operator(op, &v.rehat(l))?;
        best = best
            .max(space.distance(ul, vl)?)
            .max(space.distance(ul, &tu)?)
            .max(space.distance(vl, &tv)?);
    }
    Ok(best)
}

/// Evaluates the left- and right-hand sides of the kind's inequality on one
/// argument pair. The left side is always `d(T(u-form), T(v-form))`.
pub fn lhs_rhs<F: SeqOperator>(
    kind: &ContractionKind,
    op: &F,
    beta: &GeraghtyFn,
    u: &TupleArg,
    v: &TupleArg,
    space: &MetricSpace,
) -> Result<(f64, f64)> {
    kind.validate()?;
    let k = kind.k();
    let uh = u.to_hatted(kind)?;
    let vh = v.to_hatted(kind)?;
    let uk = uh.element_at(k).clone();
    let vk = vh.element_at(k).clone();
    let tu = apply_operator(op, &uh)?;
    let tv = apply_operator(op, &vh)?;
    let lhs = space.distance(&tu, &tv)?;

    let rhs = match kind {
        ContractionKind::Banach { c } => c * space.distance(&uk, &vk)?,
        ContractionKind::Geraghty => {
            let d = space.distance(&uk, &vk)?;
            beta.eval(d) * d
        }
        ContractionKind::Kannan { c } => {
            c * (space.distance(&tu, &uk)? + space.distance(&tv, &vk)?)
        }
        ContractionKind::Fisher { c } => {
            c * (space.distance(&tu, &vk)? + space.distance(&tv, &uk)?)
        }
        ContractionKind::Hk { .. } => {
            let m = m_k(op, &uh, &vh, k, space)?;
            beta.eval(m) * m
        }
        ContractionKind::KannanGeraghtySelf
        | ContractionKind::KannanGeraghtyDimK { .. }
        | ContractionKind::ExtKannanGeraghtyHk { .. } => {
            let d = space.distance(&uk, &vk)?;
            beta.eval(d) / 2.0 * (space.distance(&tu, &uk)? + space.distance(&tv, &vk)?)
        }
        ContractionKind::FisherGeraghtyDimK { .. }
        | ContractionKind::ExtFisherGeraghtyHk { .. } => {
            let d = space.distance(&uk, &vk)?;
            beta.eval(d) / 2.0 * (space.distance(&tu, &vk)? + space.distance(&tv, &uk)?)
        }
    };
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Point {
        Point::Scalar(x)
    }

    fn seq(prefix: &[f64], tail: f64) -> HatSequence {
        hat(prefix.iter().copied().map(s).collect(), s(tail)).unwrap()
    }

    /// Projection onto entry `j`, scaled by `c`.
    fn scaled_entry(c: f64, j: usize) -> impl Fn(&HatSequence) -> Result<Point> {
        move |q: &HatSequence| {
            let x = q.element_at(j).as_scalar().expect("scalar sequences");
            Ok(s(c * x))
        }
    }

    #[test]
    fn gauge_of_projection_is_first_entry_distance() {
        // T picks entry 1, so both self-displacement terms vanish.
        let op = scaled_entry(1.0, 1);
        let u = seq(&[], 0.3);
        let v = seq(&[], 0.7);
        let got = m_k(&op, &u, &v, 1, &MetricSpace::AbsDiff).unwrap();
        assert!((got - 0.4).abs() < 1e-15, "got {got}");
        // dyadic entries make the gauge exact
        let got = m_k(&op, &seq(&[], 0.25), &seq(&[], 0.75), 1, &MetricSpace::AbsDiff).unwrap();
        assert_eq!(got, 0.5);
    }

    #[test]
    fn gauge_vanishes_at_a_shared_fixed_point() {
        let op = scaled_entry(1.0, 1);
        let u = seq(&[], 0.25);
        let got = m_k(&op, &u, &u, 1, &MetricSpace::AbsDiff).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn gauge_three_term_example_k2() {
        // T(q) = 0.5 * entry 2. Terms at l = 2:
        //   d(u_2, v_2) = |0.4 - 0.8|        = 0.4
        //   d(u_2, T(u)) = |0.4 - 0.5*0.4|   = 0.2
        //   d(v_2, T(v)) = |0.8 - 0.5*0.8|   = 0.4
        // so the gauge is 0.4 (cross-checked by the brute-force scan in the
        // integration tests).
        let op = scaled_entry(0.5, 2);
        let u = seq(&[0.2], 0.4);
        let v = seq(&[0.6], 0.8);
        let got = m_k(&op, &u, &v, 2, &MetricSpace::AbsDiff).unwrap();
        assert!((got - 0.4).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn gauge_dominates_kth_entry_distance() {
        let op = scaled_entry(0.5, 1);
        let u = seq(&[0.9, 0.1], 0.5);
        let v = seq(&[0.2], 0.8);
        for k in 1..=4 {
            let m = m_k(&op, &u, &v, k, &MetricSpace::AbsDiff).unwrap();
            let dk = MetricSpace::AbsDiff
                .distance(u.element_at(k), v.element_at(k))
                .unwrap();
            assert!(m >= dk);
            // symmetry in (u, v)
            let m_swapped = m_k(&op, &v, &u, k, &MetricSpace::AbsDiff).unwrap();
            assert_eq!(m.to_bits(), m_swapped.to_bits());
        }
    }

    #[test]
    fn hk_sides_match_hand_evaluation() {
        // T(x) = 0.5 x, beta = 0.9: lhs = 0.5, gauge = max{1, 0.5, 0} = 1,
        // rhs = 0.9.
        let op = scaled_entry(0.5, 1);
        let beta = GeraghtyFn::constant(0.9).unwrap();
        let (lhs, rhs) = lhs_rhs(
            &ContractionKind::Hk { k: 1 },
            &op,
            &beta,
            &TupleArg::Seq(seq(&[], 1.0)),
            &TupleArg::Seq(seq(&[], 0.0)),
            &MetricSpace::AbsDiff,
        )
        .unwrap();
        assert_eq!(lhs, 0.5);
        assert_eq!(rhs, 0.9);
    }

    #[test]
    fn equal_arguments_give_zero_lhs() {
        let op = scaled_entry(0.37, 1);
        let beta = GeraghtyFn::constant(0.9).unwrap();
        for kind in [
            ContractionKind::Banach { c: 0.5 },
            ContractionKind::Geraghty,
            ContractionKind::Kannan { c: 0.4 },
            ContractionKind::Fisher { c: 0.4 },
            ContractionKind::KannanGeraghtySelf,
        ] {
            let (lhs, rhs) = lhs_rhs(
                &kind,
                &op,
                &beta,
                &TupleArg::Point(s(0.6)),
                &TupleArg::Point(s(0.6)),
                &MetricSpace::AbsDiff,
            )
            .unwrap();
            assert_eq!(lhs, 0.0);
            assert!(lhs <= rhs);
        }
    }

    #[test]
    fn fisher_style_sides_match_hand_evaluation() {
        // T(q) = 0.3 * entry 1, beta = 0.9, u = (1,...), v = (0,...):
        // lhs = 0.3, rhs = 0.45 * (d(0.3, 0) + d(0, 1)) = 0.45 * 1.3 = 0.585.
        let op = scaled_entry(0.3, 1);
        let beta = GeraghtyFn::constant(0.9).unwrap();
        let (lhs, rhs) = lhs_rhs(
            &ContractionKind::ExtFisherGeraghtyHk { k: 1 },
            &op,
            &beta,
            &TupleArg::Seq(seq(&[], 1.0)),
            &TupleArg::Seq(seq(&[], 0.0)),
            &MetricSpace::AbsDiff,
        )
        .unwrap();
        assert!((lhs - 0.3).abs() < 1e-15);
        assert!((rhs - 0.585).abs() < 1e-15);
    }

    #[test]
    fn kannan_geraghty_self_is_the_dim1_inequality() {
        let op = scaled_entry(0.2, 1);
        let beta = GeraghtyFn::constant(0.8).unwrap();
        let space = MetricSpace::AbsDiff;
        let (l1, r1) = lhs_rhs(
            &ContractionKind::KannanGeraghtySelf,
            &op,
            &beta,
            &TupleArg::Point(s(0.9)),
            &TupleArg::Point(s(0.1)),
            &space,
        )
        .unwrap();
        let (l2, r2) = lhs_rhs(
            &ContractionKind::KannanGeraghtyDimK { k: 1 },
            &op,
            &beta,
            &TupleArg::Tuple(vec![s(0.9)]),
            &TupleArg::Tuple(vec![s(0.1)]),
            &space,
        )
        .unwrap();
        assert_eq!(l1.to_bits(), l2.to_bits());
        assert_eq!(r1.to_bits(), r2.to_bits());
    }

    #[test]
    fn arity_mismatch_reported() {
        let op = scaled_entry(0.5, 1);
        let beta = GeraghtyFn::constant(0.9).unwrap();
        let err = lhs_rhs(
            &ContractionKind::KannanGeraghtyDimK { k: 2 },
            &op,
            &beta,
            &TupleArg::Tuple(vec![s(0.1)]),
            &TupleArg::Tuple(vec![s(0.2), s(0.3)]),
            &MetricSpace::AbsDiff,
        );
        assert!(matches!(err, Err(Error::ArityMismatch(_))));

        let err = lhs_rhs(
            &ContractionKind::Hk { k: 1 },
            &op,
            &beta,
            &TupleArg::Point(s(0.1)),
            &TupleArg::Point(s(0.2)),
            &MetricSpace::AbsDiff,
        );
        assert!(matches!(err, Err(Error::ArityMismatch(_))));
    }

    #[test]
    fn parameter_ranges_enforced() {
        assert!(ContractionKind::Banach { c: 1.0 }.validate().is_err());
        assert!(ContractionKind::Kannan { c: 0.5 }.validate().is_err());
        assert!(ContractionKind::Fisher { c: -0.1 }.validate().is_err());
        assert!(ContractionKind::Hk { k: 0 }.validate().is_err());
        assert!(ContractionKind::Hk { k: 3 }.validate().is_ok());
    }
}
