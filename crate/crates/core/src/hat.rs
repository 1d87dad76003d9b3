//! Eventually-constant infinite sequences: a finite prefix plus a repeated tail.
//!
//! The sequence `(x_1, ..., x_m, t, t, t, ...)` is stored as `prefix = [x_1..x_m]`
//! and `tail = t`. Every infinite tuple consumed or produced by the iteration
//! engines and contraction checkers has this shape, which is what makes the
//! suprema in the contraction gauge computable by a finite scan.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::Point;

/// An eventually-constant sequence in canonical form: no trailing prefix entry
/// equals the tail (bit-exact comparison), so equality is structural.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HatSequence {
    prefix: Vec<Point>,
    tail: Point,
}

/// Builds the sequence whose i-th entry is `prefix[i-1]` for `i <= prefix.len()`
/// and `tail` beyond. All points must share one domain descriptor.
pub fn hat(prefix: Vec<Point>, tail: Point) -> Result<HatSequence> {
    for p in &prefix {
        p.check_same_domain(&tail)?;
    }
    Ok(HatSequence::canonical(prefix, tail))
}

impl HatSequence {
    /// A constant sequence `(u, u, ...)`.
    pub fn constant(tail: Point) -> Self {
        HatSequence {
            prefix: Vec::new(),
            tail,
        }
    }

    fn canonical(mut prefix: Vec<Point>, tail: Point) -> Self {
        while prefix.last().map_or(false, |last| last.bit_eq(&tail)) {
            prefix.pop();
        }
        HatSequence { prefix, tail }
    }

    /// Prefix entries preceding the constant tail region.
    pub fn prefix(&self) -> &[Point] {
        &self.prefix
    }

    /// The repeated tail point.
    pub fn tail(&self) -> &Point {
        &self.tail
    }

    /// Smallest index from which all entries equal the tail (1-based).
    pub fn stabilization_index(&self) -> usize {
        self.prefix.len() + 1
    }

    /// The i-th entry, 1-based; total for every `i >= 1` and O(1).
    pub fn element_at(&self, i: usize) -> &Point {
        assert!(i >= 1, "sequence indices are 1-based");
        self.prefix.get(i - 1).unwrap_or(&self.tail)
    }

    /// The sequence hatted at index `l`: entries `1..l-1` kept, entry `l`
    /// repeated from there on. For `l` at or past stabilization this is `self`.
    pub fn rehat(&self, l: usize) -> HatSequence {
        assert!(l >= 1, "sequence indices are 1-based");
        if l >= self.stabilization_index() {
            return self.clone();
        }
        let prefix = self.prefix[..l - 1].to_vec();
        let tail = self.prefix[l - 1].clone();
        HatSequence::canonical(prefix, tail)
    }
}

/// Free-function form of [`HatSequence::element_at`].
pub fn element_at(seq: &HatSequence, i: usize) -> &Point {
    seq.element_at(i)
}

/// Free-function form of [`HatSequence::rehat`].
pub fn rehat(seq: &HatSequence, l: usize) -> HatSequence {
    seq.rehat(l)
}

/// An operator from the space of eventually-constant sequences into `X`.
///
/// Implemented for any `Fn(&HatSequence) -> Result<Point>`, so closures work
/// directly. Failures surface as [`Error::OperatorFailure`] at the call sites
/// that evaluate operators on rehatted sequences.
pub trait SeqOperator {
    fn apply(&self, seq: &HatSequence) -> Result<Point>;
}

impl<F> SeqOperator for F
where
    F: Fn(&HatSequence) -> Result<Point>,
{
    fn apply(&self, seq: &HatSequence) -> Result<Point> {
        self(seq)
    }
}

pub(crate) fn apply_operator(op: &dyn SeqOperator, seq: &HatSequence) -> Result<Point> {
    op.apply(seq).map_err(|e| match e {
        Error::OperatorFailure(_) => e,
        other => Error::OperatorFailure(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Point {
        Point::Scalar(x)
    }

    #[test]
    fn hat_builds_the_stated_entries() {
        let seq = hat(vec![s(0.2)], s(0.4)).unwrap();
        assert_eq!(seq.element_at(1), &s(0.2));
        assert_eq!(seq.element_at(2), &s(0.4));
        assert_eq!(seq.element_at(7), &s(0.4));

        let constant = hat(vec![], s(0.9)).unwrap();
        assert_eq!(constant.element_at(1), &s(0.9));
        assert_eq!(constant.element_at(1000), &s(0.9));
    }

    #[test]
    fn element_at_prefix_and_tail_regions() {
        let seq = hat(vec![s(1.0), s(2.0)], s(3.0)).unwrap();
        assert_eq!(seq.element_at(2), &s(2.0));
        assert_eq!(seq.element_at(3), &s(3.0));
        assert_eq!(seq.element_at(1000), &s(3.0));
    }

    #[test]
    fn rehat_at_one_collapses_to_first_entry() {
        let seq = hat(vec![s(1.0), s(2.0)], s(3.0)).unwrap();
        let r = seq.rehat(1);
        assert_eq!(r, HatSequence::constant(s(1.0)));
    }

    #[test]
    fn rehat_past_stabilization_is_identity() {
        let seq = hat(vec![s(0.2)], s(0.4)).unwrap();
        assert_eq!(seq.rehat(5), seq);
        assert_eq!(seq.rehat(2), seq);
    }

    #[test]
    fn canonicalization_trims_trailing_tail_copies() {
        let a = hat(vec![s(0.2), s(0.4), s(0.4)], s(0.4)).unwrap();
        let b = hat(vec![s(0.2)], s(0.4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stabilization_index(), 2);
    }

    #[test]
    fn mixed_domains_rejected() {
        let err = hat(vec![s(0.5)], Point::Vector(vec![1.0]));
        assert!(matches!(err, Err(Error::MismatchedDomain(_))));
    }
}
