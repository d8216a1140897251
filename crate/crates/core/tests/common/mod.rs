#![allow(dead_code)]

use fracgm::{Aux, Problem, Term};
use nalgebra::{DMatrix, Matrix3, Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let q = Quaternion::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix().into_inner()
}

pub fn random_point(rng: &mut impl Rng, half: f64) -> Vector3<f64> {
    if half == 0.0 {
        return Vector3::zeros();
    }
    Vector3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `n` rank-3 PSD terms of dimension `d`.
pub fn random_problem(rng: &mut impl Rng, d: usize, n: usize, c: f64) -> Problem {
    let terms = (0..n)
        .map(|_| {
            let b = random_matrix(rng, 3, d);
            Term::from_factor(&b, rng.random_range(0.5..2.0)).unwrap()
        })
        .collect();
    Problem::new(terms, c).unwrap()
}

pub fn random_homogenized(rng: &mut impl Rng, d: usize) -> nalgebra::DVector<f64> {
    let mut x = nalgebra::DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
    x[d - 1] = 1.0;
    x
}

pub fn random_aux(rng: &mut impl Rng, n: usize, c2: f64) -> Aux {
    let beta = (0..n).map(|_| rng.random_range(0.0..0.9 * c2)).collect();
    let mu = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
    Aux::new(beta, mu).unwrap()
}

pub fn rel_diff(a: &nalgebra::DVector<f64>, b: &nalgebra::DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
