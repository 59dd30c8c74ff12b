use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use shiftlab_core::domain::Point;
use shiftlab_core::forster::*;
use shiftlab_core::linalg::{self, dot, Matrix};
use shiftlab_core::rng::rng_from_seed;

fn unit(n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = linalg::normalize(&v) {
            return u;
        }
    }
}

/// `frac` of the points in the plane `x₃ = 0` (rotated by a random orthogonal map), the rest generic.
fn planar_cluster(total: usize, frac: f64, rng: &mut dyn RngCore) -> Vec<Point<f64>> {
    let q = random_orthogonal(3, rng);
    let planar = (total as f64 * frac).round() as usize;
    (0..total)
        .map(|i| {
            let v = if i < planar {
                let u = unit(2, rng);
                vec![u[0], u[1], 0.0]
            } else {
                unit(3, rng)
            };
            Point(linalg::normalize(&q.apply(&v)).unwrap())
        })
        .collect()
}

fn random_orthogonal(n: usize, rng: &mut dyn RngCore) -> Matrix<f64> {
    let cols: Vec<Vec<f64>> = (0..n).map(|_| unit(n, rng)).collect();
    Matrix::from_columns(&linalg::orthonormal_basis(&cols, 1e-9))
}

fn check_certified(s: &[Point<f64>], out: &ForsterOutcome<f64>, eps: f64) {
    match out {
        ForsterOutcome::Transform { a } => assert!(certifies_transform(a, s, eps)),
        ForsterOutcome::Subspace { basis } => assert!(certifies_subspace(basis, s)),
    }
}

#[test]
fn twenty_degree_fan_gets_certified_transform() {
    let t = 20f64.to_radians();
    let s = vec![Point(vec![1.0, 0.0]), Point(vec![t.cos(), t.sin()]), Point(vec![t.cos(), -t.sin()])];
    let a = match forster_transform(&s, 0.5, 2000).unwrap() {
        ForsterOutcome::Transform { a } => a,
        other => panic!("expected transform, got {other:?}"),
    };
    // independent eigenvalue oracle
    let imgs: Vec<Vec<f64>> = s.iter().map(|x| linalg::normalize(&a.apply(x)).unwrap()).collect();
    let mut m = nalgebra::DMatrix::<f64>::zeros(2, 2);
    for u in &imgs {
        let v = nalgebra::DVector::from_vec(u.clone());
        m += &v * v.transpose() / 3.0;
    }
    for l in m.symmetric_eigen().eigenvalues.iter() {
        assert!((0.25..=0.75).contains(l), "eigenvalue {l}");
    }
}

#[test]
fn generic_set_in_r3_keeps_full_space() {
    let mut rng = rng_from_seed(21);
    let s: Vec<Point<f64>> = (0..60).map(|_| Point(unit(3, &mut rng))).collect();
    let stage = forster_decompose(&s, 0.1, 0.5, &mut rng).unwrap();
    assert_eq!(stage.dim(), 3);
    assert!(stage_invariants_hold(&stage, &s, 0.5));
}

#[test]
fn heavy_planar_cluster_is_found() {
    let mut rng = rng_from_seed(22);
    for trial in 0..5 {
        let s = planar_cluster(90, 0.75, &mut rng);
        let stage = forster_decompose(&s, 0.1, 0.5, &mut rng).unwrap();
        assert_eq!(stage.dim(), 2, "trial {trial}");
        let inside = s.iter().filter(|x| stage.contains(x)).count();
        assert!(inside * 3 > 2 * s.len());
        assert!(stage_invariants_hold(&stage, &s, 0.5));
    }
}

#[test]
fn light_planar_cluster_keeps_full_space() {
    let mut rng = rng_from_seed(23);
    for trial in 0..5 {
        let s = planar_cluster(100, 0.6, &mut rng);
        let stage = forster_decompose(&s, 0.1, 0.5, &mut rng).unwrap();
        assert_eq!(stage.dim(), 3, "trial {trial}");
        assert!(stage_invariants_hold(&stage, &s, 0.5));
    }
}

#[test]
fn fuzzed_outputs_are_certified() {
    let mut rng = rng_from_seed(24);
    for _ in 0..60 {
        let n = rng.random_range(1..=6);
        let size = rng.random_range(1..=80);
        let rank = rng.random_range(1..=n);
        let q = random_orthogonal(n, &mut rng);
        let s: Vec<Point<f64>> = (0..size)
            .map(|_| {
                let mut v = unit(rank, &mut rng);
                v.resize(n, 0.0);
                Point(linalg::normalize(&q.apply(&v)).unwrap())
            })
            .collect();
        let out = forster_transform(&s, 0.5, default_max_iters(n)).unwrap();
        check_certified(&s, &out, 0.5);
    }
}

#[test]
fn images_of_isotropic_sets_anticoncentrate() {
    let mut rng = rng_from_seed(25);
    for _ in 0..20 {
        let n = rng.random_range(2..=5);
        let s: Vec<Point<f64>> = (0..40).map(|_| Point(unit(n, &mut rng))).collect();
        let stage = forster_decompose(&s, 0.1, 0.5, &mut rng).unwrap();
        let d = stage.dim();
        let imgs: Vec<Vec<f64>> = s.iter().filter(|x| stage.contains(x)).filter_map(|x| stage.normalized_image(x)).collect();
        let thr = 1.0 / (2.0 * (d as f64).sqrt());
        for _ in 0..100 {
            let w = unit(d, &mut rng);
            let hits = imgs.iter().filter(|u| dot(&w, u).abs() >= thr).count();
            assert!(hits * 4 * d >= imgs.len(), "hits {hits} of {}", imgs.len());
        }
    }
}

#[test]
fn transform_preserves_halfspace_labels() {
    let mut rng = rng_from_seed(26);
    for _ in 0..20 {
        let s = planar_cluster(60, 0.8, &mut rng);
        let stage = forster_decompose(&s, 0.1, 0.5, &mut rng).unwrap();
        let w = unit(3, &mut rng);
        let w2 = stage.transformed_normal(&w);
        for x in s.iter().filter(|x| stage.contains(x)) {
            let lhs = dot(&w, x);
            let rhs = dot(&w2, &stage.normalized_image(x).unwrap());
            if lhs.abs() > 1e-9 {
                assert_eq!(lhs > 0.0, rhs > 0.0);
            }
        }
    }
}
