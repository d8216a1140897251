use nalgebra::{DMatrix, Vector3};

use super::{PointCorrespondences, REGISTRATION_DIM, ROTATION_DIM};
use crate::error::Result;
use crate::problem::{GemanMcClureProblem, QuadraticTerm};
use crate::scalar::Real;

/// `B_i = [a_iᵀ ⊗ I₃, −b_i]`, so `B_i x = R a_i − b_i` for `x = [vec(R)ᵀ, 1]ᵀ`.
fn rotation_factor<T: Real>(a: &Vector3<T>, b: &Vector3<T>) -> DMatrix<T> {
    let mut f = DMatrix::zeros(3, ROTATION_DIM);
    fill_kron_block(&mut f, a);
    for r in 0..3 {
        f[(r, 9)] = -b[r];
    }
    f
}

/// `B_i = [a_iᵀ ⊗ I₃, I₃, −b_i]`, so `B_i x = R a_i + t − b_i`.
fn registration_factor<T: Real>(a: &Vector3<T>, b: &Vector3<T>) -> DMatrix<T> {
    let mut f = DMatrix::zeros(3, REGISTRATION_DIM);
    fill_kron_block(&mut f, a);
    for r in 0..3 {
        f[(r, 9 + r)] = T::one();
        f[(r, 12)] = -b[r];
    }
    f
}

fn fill_kron_block<T: Real>(f: &mut DMatrix<T>, a: &Vector3<T>) {
    for j in 0..3 {
        for r in 0..3 {
            f[(r, 3 * j + r)] = a[j];
        }
    }
}

fn build<T: Real>(
    corr: &PointCorrespondences<T>,
    c: T,
    factor: fn(&Vector3<T>, &Vector3<T>) -> DMatrix<T>,
) -> Result<GemanMcClureProblem<T>> {
    let terms = corr
        .source()
        .iter()
        .zip(corr.target())
        .zip(corr.noise_bounds())
        .map(|((a, b), &sigma)| QuadraticTerm::from_factor(&factor(a, b), T::one() / (sigma * sigma)))
        .collect::<Result<Vec<_>>>()?;
    GemanMcClureProblem::new(terms, c)
}

/// Ten-dimensional rotation problem with `xᵀ M̃_i x = ‖b_i − R a_i‖² / σ_i²`.
pub fn build_rotation_terms<T: Real>(
    corr: &PointCorrespondences<T>,
    c: T,
) -> Result<GemanMcClureProblem<T>> {
    build(corr, c, rotation_factor)
}

/// Thirteen-dimensional registration problem with
/// `xᵀ M̃_i x = ‖b_i − R a_i − t‖² / σ_i²`.
pub fn build_registration_terms<T: Real>(
    corr: &PointCorrespondences<T>,
    c: T,
) -> Result<GemanMcClureProblem<T>> {
    build(corr, c, registration_factor)
}
