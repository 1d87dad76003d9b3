//! Points, collocation grids, and the metric-space abstraction.
//!
//! A [`Point`] is a scalar, a fixed-length vector, or a function sampled on a
//! declared [`Grid`]. A [`MetricSpace`] selects the distance used to compare
//! two points. All values are immutable after construction and operations are
//! pure, so everything here is safe to share between threads.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// A declared set of collocation nodes over a box `[a1,b1] x ... x [an,bn]`.
///
/// Function samples are compared node-by-node, so two grids must be equal
/// (same bounds, same nodes, same order) for their sample vectors to be
/// comparable. No interpolation is ever performed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    /// Per-axis bounds `(a, b)`.
    pub bounds: Vec<(f64, f64)>,
    /// Node coordinates in canonical order; each node has `bounds.len()` entries.
    pub nodes: Vec<Vec<f64>>,
}

impl Grid {
    /// Number of spatial axes.
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Number of collocation nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the grid holds no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// An element of the underlying space `X`.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Point {
    /// A real number.
    Scalar(f64),
    /// A fixed-length real vector.
    Vector(Vec<f64>),
    /// Real samples of a function on a shared grid.
    FunctionGrid {
        values: Vec<f64>,
        grid: Arc<Grid>,
    },
}

impl Point {
    /// Samples of a function on `grid`; lengths must agree.
    pub fn on_grid(values: Vec<f64>, grid: Arc<Grid>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::MismatchedDomain(format!(
                "{} samples on a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Point::FunctionGrid { values, grid })
    }

    /// True when every stored sample is finite.
    pub fn is_finite(&self) -> bool {
        match self {
            Point::Scalar(x) => x.is_finite(),
            Point::Vector(v) => v.iter().all(|x| x.is_finite()),
            Point::FunctionGrid { values, .. } => values.iter().all(|x| x.is_finite()),
        }
    }

    /// Scalar payload, if this point is a scalar.
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    /// Sample slice for vector and grid points, single value for scalars.
    pub fn samples(&self) -> &[f64] {
        match self {
            Point::Scalar(x) => std::slice::from_ref(x),
            Point::Vector(v) => v,
            Point::FunctionGrid { values, .. } => values,
        }
    }

    /// Bit-exact equality: scalars and samples compared through `f64::to_bits`,
    /// grids compared structurally. This is the equality canonicalization uses.
    pub fn bit_eq(&self, other: &Point) -> bool {
        match (self, other) {
            (Point::Scalar(a), Point::Scalar(b)) => a.to_bits() == b.to_bits(),
            (Point::Vector(a), Point::Vector(b)) => bits_eq(a, b),
            (
                Point::FunctionGrid { values: a, grid: ga },
                Point::FunctionGrid { values: b, grid: gb },
            ) => (Arc::ptr_eq(ga, gb) || ga == gb) && bits_eq(a, b),
            _ => false,
        }
    }

    /// Checks that `self` and `other` live on the same domain descriptor.
    pub fn check_same_domain(&self, other: &Point) -> Result<()> {
        match (self, other) {
            (Point::Scalar(_), Point::Scalar(_)) => Ok(()),
            (Point::Vector(a), Point::Vector(b)) => {
                if a.len() == b.len() {
                    Ok(())
                } else {
                    Err(Error::MismatchedDomain(format!(
                        "vector lengths {} and {}",
                        a.len(),
                        b.len()
                    )))
                }
            }
            (
                Point::FunctionGrid { grid: ga, .. },
                Point::FunctionGrid { grid: gb, .. },
            ) => {
                if Arc::ptr_eq(ga, gb) || ga == gb {
                    Ok(())
                } else {
                    Err(Error::MismatchedDomain("grids differ".into()))
                }
            }
            _ => Err(Error::MismatchedDomain(
                "points are of different kinds".into(),
            )),
        }
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.bit_eq(other)
    }
}

fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Distance function type for user-supplied metrics.
pub type UserDistanceFn = Arc<dyn Fn(&Point, &Point) -> Result<f64> + Send + Sync>;

/// The distance function of the space `(X, d)`.
#[derive(Clone)]
pub enum MetricSpace {
    /// `d(x, y) = |x - y|` on scalars.
    AbsDiff,
    /// `d(x, y) = max_i |x_i - y_i|` on vectors or grid samples.
    SupOnGrid,
    /// `d(x, y) = w * max_i |x_i - y_i|` with `w = exp(-asin(alpha))`.
    WeightedSupOnGrid { alpha: f64, weight: f64 },
    /// Caller-supplied distance; axioms are the caller's responsibility.
    UserDistance(UserDistanceFn),
}

impl fmt::Debug for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpace::AbsDiff => write!(f, "AbsDiff"),
            MetricSpace::SupOnGrid => write!(f, "SupOnGrid"),
            MetricSpace::WeightedSupOnGrid { alpha, weight } => {
                write!(f, "WeightedSupOnGrid {{ alpha: {alpha}, weight: {weight} }}")
            }
            MetricSpace::UserDistance(_) => write!(f, "UserDistance(..)"),
        }
    }
}

impl MetricSpace {
    /// Weighted sup metric with weight `exp(-asin(alpha))`, `alpha` in (0, 1].
    pub fn weighted_sup(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(MetricSpace::WeightedSupOnGrid {
            alpha,
            weight: (-alpha.asin()).exp(),
        })
    }

    /// The constant that rescales all distances of this space (1 if unweighted).
    pub fn weight(&self) -> f64 {
        match self {
            MetricSpace::WeightedSupOnGrid { weight, .. } => *weight,
            _ => 1.0,
        }
    }

    /// Distance between two points of the space.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite("left point".into()));
        }
        if !y.is_finite() {
            return Err(Error::NonFinite("right point".into()));
        }
        match self {
            MetricSpace::AbsDiff => match (x, y) {
                (Point::Scalar(a), Point::Scalar(b)) => Ok((a - b).abs()),
                _ => Err(Error::MismatchedDomain(
                    "AbsDiff is defined on scalars".into(),
                )),
            },
            MetricSpace::SupOnGrid => {
                x.check_same_domain(y)?;
                Ok(sup_diff(x.samples(), y.samples()))
            }
            MetricSpace::WeightedSupOnGrid { weight, .. } => {
                x.check_same_domain(y)?;
                Ok(*weight * sup_diff(x.samples(), y.samples()))
            }
            MetricSpace::UserDistance(d) => d(x, y),
        }
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
