//! Cross-module properties checked through the public API on random
//! operators and sets.

use bigconj_core::fitzpatrick::{bc_check, pos_extract, BivariateFunction, GridSpec};
use bigconj_core::linalg::{dot, symmetric_spectral_norm};
use bigconj_core::relations::{LinearRelation, Witness};
use bigconj_core::sets::random_in_ball;
use bigconj_core::{seeded_rng, ConvexSet, ExtReal, Matrix, Vector};
use proptest::prelude::*;
use rand::Rng;

/// `K + BBᵀ` with `K` skew: monotone, and maximal as a full-domain map.
fn random_monotone(n: usize, rng: &mut impl Rng) -> Matrix {
    let k = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&k - k.transpose()) + &b * b.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn graph_basis_is_orthonormal(seed in 0u64..10_000, n in 1usize..6) {
        let mut rng = seeded_rng(seed);
        let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
        let a = LinearRelation::from_matrix(&m, None).unwrap();
        let g = a.graph().basis();
        let gram = g.transpose() * g;
        let err = (gram - Matrix::identity(g.ncols(), g.ncols())).abs().max();
        prop_assert!(err <= 1e-12, "gram error {err}");
    }

    #[test]
    fn non_monotone_witness_certifies(seed in 0u64..10_000, n in 1usize..5) {
        let mut rng = seeded_rng(seed);
        // a negative definite direction guarantees failure of monotonicity
        let m = random_monotone(n, &mut rng) - Matrix::identity(n, n) * 20.0;
        let a = LinearRelation::from_matrix(&m, None).unwrap();
        let report = a.classify();
        prop_assert!(!report.monotone);
        match report.witness {
            Some(Witness::NonMonotonePair { x, xstar, y, ystar, .. }) => {
                for (p, ps) in [(&x, &xstar), (&y, &ystar)] {
                    prop_assert!(a.contains(p, ps, 1e-9).unwrap());
                }
                let dx: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                let ds: Vec<f64> = xstar.iter().zip(&ystar).map(|(a, b)| a - b).collect();
                prop_assert!(dot(&dx, &ds) < 0.0);
            }
            other => prop_assert!(false, "unexpected witness {other:?}"),
        }
    }

    /// On graph points the sampled Fitzpatrick function sits between the
    /// pairing minus `||M|| d²` (d: distance to the nearest sample point)
    /// and the pairing itself.
    #[test]
    fn sampled_fitzpatrick_brackets_pairing_on_graph(seed in 0u64..10_000, n in 1usize..4) {
        let mut rng = seeded_rng(seed);
        let m = random_monotone(n, &mut rng);
        let norm = symmetric_spectral_norm(&(&m + m.transpose())) / 2.0;
        let sample: Vec<(Vector, Vector)> = (0..400)
            .map(|_| {
                let x = random_in_ball(n, 1.0, &mut rng);
                let xs = &m * &x;
                (x, xs)
            })
            .collect();
        let f = BivariateFunction::from_sample(&sample).unwrap();
        for _ in 0..50 {
            let q = random_in_ball(n, 1.0, &mut rng);
            let qs = &m * &q;
            let d2 = sample.iter().map(|(a, _)| (&q - a).norm_squared()).fold(f64::INFINITY, f64::min);
            let gap = f.eval(q.as_slice(), qs.as_slice()).unwrap().to_f64() - q.dot(&qs);
            prop_assert!(gap <= 1e-12, "gap {gap}");
            prop_assert!(gap >= -norm * d2 - 1e-12, "gap {gap}, bound {}", norm * d2);
        }
    }

    /// BC inequalities of the closed-form Fitzpatrick function of a random
    /// maximally monotone map, at random points of the product space.
    #[test]
    fn linear_fitzpatrick_is_bc(seed in 0u64..10_000, n in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let m = random_monotone(n, &mut rng);
        let a = LinearRelation::from_matrix(&m, None).unwrap();
        let f = BivariateFunction::fitz_linear(a);
        let pts: Vec<(Vector, Vector)> =
            (0..200).map(|_| (random_in_ball(n, 3.0, &mut rng), random_in_ball(n, 3.0, &mut rng))).collect();
        let rep = bc_check(&f, &pts, &GridSpec::new(1.0, 3).unwrap(), 1e-9).unwrap();
        prop_assert!(rep.passed, "{:?}", rep.violation);
    }

    /// Fenchel-Young for the flipped conjugate pair:
    /// `F(x, x*) + F*(y*, y) >= <x, y*> + <x*, y>`.
    #[test]
    fn fenchel_young_for_fitzpatrick_pair(seed in 0u64..10_000, n in 1usize..5) {
        let mut rng = seeded_rng(seed);
        let m = random_monotone(n, &mut rng);
        let a = LinearRelation::from_matrix(&m, None).unwrap();
        let f = BivariateFunction::fitz_linear(a);
        for _ in 0..100 {
            let (x, xs) = (random_in_ball(n, 3.0, &mut rng), random_in_ball(n, 3.0, &mut rng));
            let y = random_in_ball(n, 3.0, &mut rng);
            // keep y* on the range where the conjugate is finite half the time
            let ys = if rng.random_bool(0.5) { &m * &y } else { random_in_ball(n, 3.0, &mut rng) };
            let lhs = f.eval(x.as_slice(), xs.as_slice()).unwrap()
                .checked_add(f.flipped_conjugate_exact(ys.as_slice(), y.as_slice()).unwrap().unwrap())
                .unwrap();
            let rhs = x.dot(&ys) + xs.dot(&y);
            prop_assert!(lhs >= ExtReal::Finite(rhs - 1e-9 * (1.0 + rhs.abs())), "{lhs} < {rhs}");
        }
    }
}

/// Every point of `pos F_{N_C}` found on a grid lies in `gra N_C`.
#[test]
fn pos_of_normal_cone_fitzpatrick_is_in_the_graph() {
    let sets = [
        ConvexSet::segment(Vector::from_vec(vec![-1.0]), Vector::from_vec(vec![1.0])).unwrap(),
        ConvexSet::boxed(Vector::from_vec(vec![-1.0, 0.0]), Vector::from_vec(vec![1.0, 1.0])).unwrap(),
        ConvexSet::unit_ball(2),
    ];
    for c in sets {
        let f = BivariateFunction::FitzNormalCone(c.clone());
        let pos = pos_extract(&f, &GridSpec::new(2.0, 9).unwrap(), 1e-12).unwrap();
        assert!(!pos.points.is_empty());
        for (x, xs) in &pos.points {
            let cone = c.normal_cone(x.as_slice(), 1e-9).unwrap();
            assert!(cone.contains(xs.as_slice(), 1e-9), "{x} {xs} not in gra N_C");
        }
    }
}
