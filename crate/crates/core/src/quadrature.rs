//! Quadrature rules tensorized over the axes of a box domain.
//!
//! Deterministic rules (Gauss-Legendre, composite trapezoid) build a tensor
//! grid whose weights sum to the domain volume; the Monte Carlo rule scatters
//! seeded uniform points. Reductions over nodes use a fixed pairwise order so
//! results are bit-reproducible.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::Grid;

/// A quadrature rule, applied per axis and tensorized over the domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum QuadratureRule {
    /// Gauss-Legendre with the given node count per axis; exact for
    /// polynomials of degree `2m - 1` per axis.
    GaussLegendre { nodes_per_axis: usize },
    /// Composite trapezoid with the given node count per axis (endpoints
    /// included).
    CompositeTrapezoid { nodes_per_axis: usize },
    /// Seeded uniform points with equal weights `volume / n_points`.
    MonteCarlo { n_points: usize, seed: u64 },
}

impl QuadratureRule {
    /// True for rules whose nodes are a deterministic function of the domain.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, QuadratureRule::MonteCarlo { .. })
    }

    /// Builds the node/weight set for a box given by per-axis bounds.
    pub fn node_set(&self, bounds: &[(f64, f64)]) -> Result<NodeSet> {
        if bounds.is_empty() {
            return Err(Error::InvalidParameter("domain has no axes".into()));
        }
        for &(a, b) in bounds {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "invalid axis bounds [{a}, {b}]"
                )));
            }
        }
        match *self {
            QuadratureRule::GaussLegendre { nodes_per_axis } => {
                if nodes_per_axis == 0 {
                    return Err(Error::InvalidParameter(
                        "Gauss-Legendre needs at least one node per axis".into(),
                    ));
                }
                let (ref_nodes, ref_weights) = gauss_legendre_reference(nodes_per_axis);
                tensorize(bounds, &ref_nodes, &ref_weights, true)
            }
            QuadratureRule::CompositeTrapezoid { nodes_per_axis } => {
                if nodes_per_axis < 2 {
                    return Err(Error::InvalidParameter(
                        "trapezoid needs at least two nodes per axis".into(),
                    ));
                }
                let m = nodes_per_axis;
                let h = 2.0 / (m - 1) as f64;
                let nodes: Vec<f64> = (0..m).map(|i| -1.0 + i as f64 * h).collect();
                let weights: Vec<f64> = (0..m)
                    .map(|i| if i == 0 || i == m - 1 { h / 2.0 } else { h })
                    .collect();
                tensorize(bounds, &nodes, &weights, true)
            }
            QuadratureRule::MonteCarlo { n_points, seed } => {
                if n_points == 0 {
                    return Err(Error::InvalidParameter(
                        "Monte Carlo needs at least one point".into(),
                    ));
                }
                let volume: f64 = bounds.iter().map(|&(a, b)| b - a).product();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let nodes: Vec<Vec<f64>> = (0..n_points)
                    .map(|_| bounds.iter().map(|&(a, b)| rng.gen_range(a..b)).collect())
                    .collect();
                Ok(NodeSet {
                    grid: Arc::new(Grid {
                        bounds: bounds.to_vec(),
                        nodes,
                    }),
                    weights: vec![volume / n_points as f64; n_points],
                    deterministic: false,
                })
            }
        }
    }
}

/// Collocation nodes with their quadrature weights.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub grid: Arc<Grid>,
    pub weights: Vec<f64>,
    pub deterministic: bool,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Reference Gauss-Legendre nodes and weights on [-1, 1], ascending.
///
/// Computed from the eigen-decomposition of the Jacobi matrix of the Legendre
/// recurrence: nodes are the eigenvalues, weights are `2 q_0^2` with `q_0` the
/// first component of the normalized eigenvectors.
fn gauss_legendre_reference(m: usize) -> (Vec<f64>, Vec<f64>) {
    if m == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        let b = i as f64 / ((4 * i * i - 1) as f64).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eigen = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, &node)| {
            let q0 = eigen.eigenvectors[(0, j)];
            (node, 2.0 * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    pairs.into_iter().unzip()
}

/// Tensorizes per-axis reference nodes/weights on [-1, 1] over the box,
/// enumerating multi-indices with the first axis slowest (canonical order).
fn tensorize(
    bounds: &[(f64, f64)],
    ref_nodes: &[f64],
    ref_weights: &[f64],
    deterministic: bool,
) -> Result<NodeSet> {
    let m = ref_nodes.len();
    let dim = bounds.len();
    let total = m
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidParameter("tensor grid overflows".into()))?;

    let axis_nodes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(a, b)| {
            ref_nodes
                .iter()
                .map(|&x| a + (b - a) * (x + 1.0) / 2.0)
                .collect()
        })
        .collect();
    let axis_weights: Vec<Vec<f64>> = bounds
        .iter()
        .map(|&(a, b)| ref_weights.iter().map(|&w| w * (b - a) / 2.0).collect())
        .collect();

    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut index = vec![0usize; dim];
    loop {
        let node: Vec<f64> = (0..dim).map(|ax| axis_nodes[ax][index[ax]]).collect();
        let weight: f64 = (0..dim).map(|ax| axis_weights[ax][index[ax]]).product();
        nodes.push(node);
        weights.push(weight);

        // increment multi-index, last axis fastest
        let mut ax = dim;
        loop {
            if ax == 0 {
                return Ok(NodeSet {
                    grid: Arc::new(Grid {
                        bounds: bounds.to_vec(),
                        nodes,
                    }),
                    weights,
                    deterministic,
                });
            }
            ax -= 1;
            index[ax] += 1;
            if index[ax] < m {
                break;
            }
            index[ax] = 0;
        }
    }
}

/// Sums in a fixed pairwise (balanced-tree) order over the slice's canonical
/// ordering; deterministic and more accurate than left-to-right accumulation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
