//! Metric axioms on bulk random triples, and structural properties of
//! eventually-constant sequences.

use std::sync::Arc;

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use picardo_core::{hat, Grid, HatSequence, MetricSpace, Point};

const TRIPLES: usize = 10_000;
const GRID_TRIANGLE_TOL: f64 = 1e-12;
// collinear scalar triples round the direct distance one ulp above the sum
const SCALAR_TRIANGLE_TOL: f64 = 1e-13;

fn check_axioms(
    space: &MetricSpace,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> Point,
    seed: u64,
    triangle_tol: f64,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..TRIPLES {
        let x = gen(&mut rng);
        let y = gen(&mut rng);
        let z = gen(&mut rng);
        let dxy = space.distance(&x, &y).unwrap();
        let dyx = space.distance(&y, &x).unwrap();
        let dxz = space.distance(&x, &z).unwrap();
        let dyz = space.distance(&y, &z).unwrap();
        assert!(dxy >= 0.0);
        assert_eq!(dxy.to_bits(), dyx.to_bits(), "symmetry must be exact");
        assert!(
            dxz <= dxy + dyz + triangle_tol,
            "triangle inequality: {dxz} > {dxy} + {dyz}"
        );
        assert_eq!(space.distance(&x, &x).unwrap(), 0.0);
    }
}

#[test]
fn abs_diff_satisfies_the_axioms() {
    check_axioms(
        &MetricSpace::AbsDiff,
        |rng| Point::Scalar(rng.gen_range(-10.0..10.0)),
        1,
        SCALAR_TRIANGLE_TOL,
    );
}

#[test]
fn sup_on_grid_satisfies_the_axioms() {
    let grid = Arc::new(Grid {
        bounds: vec![(0.0, 1.0)],
        nodes: (0..8).map(|i| vec![i as f64 / 7.0]).collect(),
    });
    check_axioms(
        &MetricSpace::SupOnGrid,
        move |rng| {
            let values = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
            Point::on_grid(values, Arc::clone(&grid)).unwrap()
        },
        2,
        GRID_TRIANGLE_TOL,
    );
}

#[test]
fn weighted_sup_satisfies_the_axioms() {
    let grid = Arc::new(Grid {
        bounds: vec![(0.0, 1.0)],
        nodes: (0..6).map(|i| vec![i as f64 / 5.0]).collect(),
    });
    let space = MetricSpace::weighted_sup(0.7).unwrap();
    check_axioms(
        &space,
        move |rng| {
            let values = (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect();
            Point::on_grid(values, Arc::clone(&grid)).unwrap()
        },
        3,
        GRID_TRIANGLE_TOL,
    );
}

#[test]
fn user_distance_satisfies_the_axioms() {
    // the square-root transform of a metric is again a metric
    let space = MetricSpace::UserDistance(Arc::new(|x: &Point, y: &Point| {
        let (a, b) = (x.as_scalar().unwrap(), y.as_scalar().unwrap());
        Ok((a - b).abs().sqrt())
    }));
    check_axioms(
        &space,
        |rng| Point::Scalar(rng.gen_range(-10.0..10.0)),
        4,
        SCALAR_TRIANGLE_TOL,
    );
}

#[test]
fn weighted_metric_rescales_uniformly() {
    let grid = Arc::new(Grid {
        bounds: vec![(0.0, 1.0)],
        nodes: (0..4).map(|i| vec![i as f64 / 3.0]).collect(),
    });
    let plain = MetricSpace::SupOnGrid;
    let weighted = MetricSpace::weighted_sup(0.4).unwrap();
    let w = weighted.weight();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let x = Point::on_grid(
            (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            Arc::clone(&grid),
        )
        .unwrap();
        let y = Point::on_grid(
            (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            Arc::clone(&grid),
        )
        .unwrap();
        let dw = weighted.distance(&x, &y).unwrap();
        let dp = plain.distance(&x, &y).unwrap();
        assert_eq!(dw.to_bits(), (w * dp).to_bits());
    }
}

fn scalar_seq() -> impl Strategy<Value = HatSequence> {
    (
        proptest::collection::vec(-100i32..100, 0..6),
        -100i32..100,
    )
        .prop_map(|(prefix, tail)| {
            let prefix = prefix
                .into_iter()
                .map(|v| Point::Scalar(v as f64 / 16.0))
                .collect();
            hat(prefix, Point::Scalar(tail as f64 / 16.0)).unwrap()
        })
}

proptest! {
    #[test]
    fn rehat_is_idempotent(s in scalar_seq(), l in 1usize..10) {
        let once = s.rehat(l);
        let twice = once.rehat(l);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn rehat_at_or_past_stabilization_is_identity(s in scalar_seq(), extra in 0usize..5) {
        let l = s.stabilization_index() + extra;
        prop_assert_eq!(s.rehat(l), s);
    }

    #[test]
    fn rehat_keeps_entries_below_the_hat(s in scalar_seq(), l in 1usize..10) {
        let r = s.rehat(l);
        for i in 1..l {
            prop_assert_eq!(r.element_at(i), s.element_at(i));
        }
        for i in l..l + 8 {
            prop_assert_eq!(r.element_at(i), s.element_at(l));
        }
    }

    #[test]
    fn canonical_equality_is_elementwise_agreement(a in scalar_seq(), b in scalar_seq()) {
        let horizon = a.stabilization_index().max(b.stabilization_index()) + 1;
        let agree = (1..=horizon).all(|i| a.element_at(i) == b.element_at(i));
        prop_assert_eq!(agree, a == b);
    }
}
