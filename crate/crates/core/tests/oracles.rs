mod common;

use common::*;
use fracgm::geometry::{closed_form_alignment, project_to_so3};
use fracgm::{solve_weighted_quadratic, Correspondences};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::Rng;

/// Steepest descent with exact line search on `xᵀAx` over the hyperplane
/// `x_h = 1`; the gradient is projected by zeroing its last entry.
fn projected_gradient(a: &DMatrix<f64>, max_steps: usize) -> DVector<f64> {
    let d = a.nrows();
    let mut x = DVector::zeros(d);
    x[d - 1] = 1.0;
    for _ in 0..max_steps {
        let mut g = 2.0 * a * &x;
        g[d - 1] = 0.0;
        let gg = g.dot(&g);
        if gg.sqrt() <= 1e-14 * a.norm() * x.norm() {
            break;
        }
        let step = gg / (2.0 * g.dot(&(a * &g)));
        x -= step * g;
    }
    x
}

fn assembled(problem: &fracgm::Problem, aux: &fracgm::Aux) -> DMatrix<f64> {
    let c2 = problem.c_squared();
    let d = problem.dim();
    problem
        .terms()
        .iter()
        .zip(aux.beta.iter().zip(&aux.mu))
        .fold(DMatrix::zeros(d, d), |acc, (t, (&b, &m))| acc + t.matrix() * (m * (c2 - b)))
}

#[test]
fn weighted_quadratic_matches_projected_gradient() {
    let mut rng = rng(11);
    for &d in &[4usize, 6, 10, 13] {
        for _ in 0..10 {
            let n = rng.random_range(d..3 * d);
            let problem = random_problem(&mut rng, d, n, 1.0);
            let aux = random_aux(&mut rng, n, 1.0);
            let x = solve_weighted_quadratic(&problem, &aux).unwrap();
            let oracle = projected_gradient(&assembled(&problem, &aux), 100_000);
            assert_eq!(x[d - 1], 1.0);
            let rel = rel_diff(&x, &oracle);
            assert!(rel <= 1e-6, "d={d}: relative difference {rel:e}");
        }
    }
}

fn frobenius_gap(m: &Matrix3<f64>, r: &Matrix3<f64>) -> f64 {
    (m - r).norm_squared()
}

#[test]
fn projection_beats_sampled_rotations() {
    let mut rng = rng(12);
    let samples: Vec<Matrix3<f64>> = (0..100_000).map(|_| random_rotation(&mut rng)).collect();
    for _ in 0..5 {
        let m = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let r = project_to_so3(&m);
        let ours = frobenius_gap(&m, &r);
        let best = samples
            .iter()
            .min_by(|a, b| frobenius_gap(&m, a).total_cmp(&frobenius_gap(&m, b)))
            .unwrap();
        assert!(ours <= frobenius_gap(&m, best) + 1e-12);
        // 1e5 samples cover SO(3) to within a few degrees
        let angle = fracgm::geometry::rotation_error_deg(&r, best);
        assert!(angle < 10.0, "best sample is {angle}° away");
    }
}

fn wahba_cost(corr: &Correspondences, r: &Matrix3<f64>, t: &Vector3<f64>) -> f64 {
    corr.source()
        .iter()
        .zip(corr.target())
        .zip(corr.noise_bounds())
        .map(|((a, b), s)| (b - r * a - t).norm_squared() / (s * s))
        .sum()
}

#[test]
fn closed_form_beats_nearby_rotations() {
    let mut rng = rng(13);
    let truth = random_rotation(&mut rng);
    let source: Vec<_> = (0..40).map(|_| random_point(&mut rng, 0.5)).collect();
    let target: Vec<_> = source
        .iter()
        .map(|a| truth * a + random_point(&mut rng, 0.05))
        .collect();
    let bounds: Vec<f64> = (0..40).map(|_| rng.random_range(0.01..0.1)).collect();
    let corr = Correspondences::new(source, target, bounds).unwrap();

    for with_translation in [false, true] {
        let est = closed_form_alignment(&corr, with_translation).unwrap();
        let best = wahba_cost(&corr, &est.rotation, &est.translation);
        for _ in 0..20_000 {
            let axis = random_point(&mut rng, 1.0);
            let angle = rng.random_range(0.0..0.05);
            let delta = nalgebra::Rotation3::new(axis.normalize() * angle).into_inner();
            let r = delta * est.rotation;
            let t = if with_translation {
                // optimal translation for this rotation
                let w: f64 = corr.noise_bounds().iter().map(|s| 1.0 / (s * s)).sum();
                corr.source()
                    .iter()
                    .zip(corr.target())
                    .zip(corr.noise_bounds())
                    .map(|((a, b), s)| (b - r * a) / (s * s))
                    .sum::<Vector3<f64>>()
                    / w
            } else {
                Vector3::zeros()
            };
            assert!(wahba_cost(&corr, &r, &t) >= best - 1e-9 * best);
        }
    }
}
