use nalgebra::{Matrix3, Vector3};

use super::so3::project_to_so3;
use super::{PointCorrespondences, RigidTransform};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Closed-form least-squares alignment (Horn/Kabsch).
///
/// Pairs are weighted by `1/σ_i²`, which reduces to the plain centroid and
/// cross-covariance when all noise bounds are equal. Without translation the
/// points are used as given; the returned translation is then zero.
pub fn closed_form_alignment<T: Real>(
    corr: &PointCorrespondences<T>,
    with_translation: bool,
) -> Result<RigidTransform<T>> {
    let weights: Vec<T> = corr
        .noise_bounds()
        .iter()
        .map(|&s| T::one() / (s * s))
        .collect();
    let total = weights.iter().fold(T::zero(), |a, &w| a + w);

    let (src_mean, dst_mean) = if with_translation {
        let mut sm = Vector3::zeros();
        let mut dm = Vector3::zeros();
        for ((a, b), &w) in corr.source().iter().zip(corr.target()).zip(&weights) {
            sm += a * w;
            dm += b * w;
        }
        (sm / total, dm / total)
    } else {
        (Vector3::zeros(), Vector3::zeros())
    };

    // H = Σ w ã b̃ᵀ
    let mut h = Matrix3::zeros();
    for ((a, b), &w) in corr.source().iter().zip(corr.target()).zip(&weights) {
        let ac = a - src_mean;
        let bc = b - dst_mean;
        h += (ac * w) * bc.transpose();
    }

    let sv = h.singular_values();
    let mut sorted = [sv[0], sv[1], sv[2]];
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let rank_tol = lit::<T>(1e-10).max(T::default_epsilon() * lit(16.0));
    if !(sorted[0] > T::zero()) || sorted[1] <= rank_tol * sorted[0] {
        return Err(Error::DegenerateGeometry(
            "cross-covariance has rank < 2 (collinear or coincident points)".into(),
        ));
    }

    let rotation = project_to_so3(&h.transpose());
    let translation = if with_translation {
        dst_mean - rotation * src_mean
    } else {
        Vector3::zeros()
    };
    Ok(RigidTransform {
        rotation,
        translation,
    })
}
