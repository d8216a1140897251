use nalgebra::{Matrix3, Vector3};

use crate::scalar::{lit, Real};

/// Result of projecting a matrix onto `SO(3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3Projection<T: Real> {
    pub rotation: Matrix3<T>,
    /// Set when the nearest rotation is not unique: a sign flip was needed
    /// and the two smallest singular values coincide (or the input is zero).
    pub ambiguous: bool,
}

/// Nearest rotation in Frobenius norm: `U·diag(1, 1, det(UVᵀ))·Vᵀ`.
pub fn project_to_so3<T: Real>(m: &Matrix3<T>) -> Matrix3<T> {
    project_to_so3_with_diagnostics(m).rotation
}

pub fn project_to_so3_with_diagnostics<T: Real>(m: &Matrix3<T>) -> So3Projection<T> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sv = svd.singular_values;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let (largest, mid, smallest) = (sv[order[0]], sv[order[1]], sv[order[2]]);

    let sign = if (u.determinant() * v_t.determinant()) < T::zero() {
        -T::one()
    } else {
        T::one()
    };
    let mut d = Vector3::repeat(T::one());
    d[order[2]] = sign;
    let rotation = u * Matrix3::from_diagonal(&d) * v_t;

    let tie_tol = lit::<T>(1e-12) * largest;
    let ambiguous =
        largest == T::zero() || (sign < T::zero() && (mid - smallest).abs() <= tie_tol);
    So3Projection {
        rotation,
        ambiguous,
    }
}

/// Geodesic distance between two rotations, in degrees.
///
/// Evaluated as `atan2(sin θ, cos θ)` on `Q = R_gtᵀ R_est`, which equals
/// `arccos((tr Q − 1)/2)` but keeps full precision near zero.
pub fn rotation_error_deg<T: Real>(r_est: &Matrix3<T>, r_gt: &Matrix3<T>) -> T {
    let q = r_gt.transpose() * r_est;
    let two = lit::<T>(2.0);
    let cos = ((q.trace() - T::one()) / two).clamp(-T::one(), T::one());
    let axial = Vector3::new(
        q[(2, 1)] - q[(1, 2)],
        q[(0, 2)] - q[(2, 0)],
        q[(1, 0)] - q[(0, 1)],
    );
    let sin = axial.norm() / two;
    sin.atan2(cos) * lit(180.0) / T::pi()
}

/// Euclidean distance between translations.
pub fn translation_error<T: Real>(t_est: &Vector3<T>, t_gt: &Vector3<T>) -> T {
    (t_est - t_gt).norm()
}
