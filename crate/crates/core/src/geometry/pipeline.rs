use nalgebra::Vector3;

use super::{
    build_registration_terms, build_rotation_terms, closed_form_alignment, devectorize,
    project_to_so3, vectorize, PointCorrespondences, RigidTransform, REGISTRATION_DIM,
    ROTATION_DIM,
};
use crate::error::Result;
use crate::scalar::Real;
use crate::solver::{fracgm_solve, SolverConfig, SolverResult};

/// Robust rotation estimate: closed-form initial guess, Geman-McClure
/// alternation on the relaxed problem, then projection onto `SO(3)`.
pub fn solve_rotation<T: Real>(
    corr: &PointCorrespondences<T>,
    config: &SolverConfig<T>,
) -> Result<(RigidTransform<T>, SolverResult<T>)> {
    config.validate()?;
    let init = closed_form_alignment(corr, false)?;
    let x0 = vectorize(&init, ROTATION_DIM)?;
    let problem = build_rotation_terms(corr, config.c)?;
    let result = fracgm_solve(&problem, &x0, config)?;
    let (relaxed, _) = devectorize(&result.x)?;
    let transform = RigidTransform {
        rotation: project_to_so3(&relaxed),
        translation: Vector3::zeros(),
    };
    Ok((transform, result))
}

/// Robust rigid registration estimating rotation and translation jointly.
///
/// The translation is read from the relaxed solution and is not re-fitted
/// after the rotation block is projected.
pub fn solve_registration<T: Real>(
    corr: &PointCorrespondences<T>,
    config: &SolverConfig<T>,
) -> Result<(RigidTransform<T>, SolverResult<T>)> {
    config.validate()?;
    let init = closed_form_alignment(corr, true)?;
    let x0 = vectorize(&init, REGISTRATION_DIM)?;
    let problem = build_registration_terms(corr, config.c)?;
    let result = fracgm_solve(&problem, &x0, config)?;
    let (relaxed, translation) = devectorize(&result.x)?;
    let transform = RigidTransform {
        rotation: project_to_so3(&relaxed),
        translation,
    };
    Ok((transform, result))
}
