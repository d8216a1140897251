//! Rotation and registration front-ends.
//!
//! Both problems are relaxed from `SO(3)` to `ℝ^{3×3}` and written over a
//! homogenized variable
//!
//! ```text
//! rotation:      x = [vec(R)ᵀ, 1]ᵀ       ∈ ℝ¹⁰
//! registration:  x = [vec(R)ᵀ, tᵀ, 1]ᵀ   ∈ ℝ¹³
//! ```
//!
//! with `vec` stacking columns, so that `(aᵀ ⊗ I₃) vec(R) = R a`. After the
//! robust solve the rotation block is projected back onto `SO(3)`; the
//! translation block is used as is.

mod alignment;
mod pipeline;
mod so3;
mod terms;

use nalgebra::{DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub use alignment::closed_form_alignment;
pub use pipeline::{solve_registration, solve_rotation};
pub use so3::{
    project_to_so3, project_to_so3_with_diagnostics, rotation_error_deg, translation_error,
    So3Projection,
};
pub use terms::{build_registration_terms, build_rotation_terms};

/// Homogenized dimension of the rotation problem.
pub const ROTATION_DIM: usize = 10;
/// Homogenized dimension of the registration problem.
pub const REGISTRATION_DIM: usize = 13;

/// Paired source/target points with per-pair noise bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCorrespondences<T: Real> {
    source: Vec<Vector3<T>>,
    target: Vec<Vector3<T>>,
    noise_bounds: Vec<T>,
}

impl<T: Real> PointCorrespondences<T> {
    pub fn new(
        source: Vec<Vector3<T>>,
        target: Vec<Vector3<T>>,
        noise_bounds: Vec<T>,
    ) -> Result<Self> {
        if source.len() != target.len() || source.len() != noise_bounds.len() {
            return Err(Error::InvalidArgument(format!(
                "length mismatch: {} source, {} target, {} noise bounds",
                source.len(),
                target.len(),
                noise_bounds.len()
            )));
        }
        if source.len() < 3 {
            return Err(Error::InsufficientData {
                required: 3,
                got: source.len(),
            });
        }
        if let Some(i) = noise_bounds
            .iter()
            .position(|&s| !(s > T::zero()) || !s.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "noise bound {i} is not positive and finite"
            )));
        }
        let finite = |v: &Vector3<T>| v.iter().all(|c| c.is_finite());
        if !source.iter().all(finite) || !target.iter().all(finite) {
            return Err(Error::InvalidArgument(
                "point coordinates must be finite".into(),
            ));
        }
        Ok(Self {
            source,
            target,
            noise_bounds,
        })
    }

    /// Same noise bound for every pair.
    pub fn with_uniform_bound(
        source: Vec<Vector3<T>>,
        target: Vec<Vector3<T>>,
        noise_bound: T,
    ) -> Result<Self> {
        let n = source.len();
        Self::new(source, target, vec![noise_bound; n])
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn source(&self) -> &[Vector3<T>] {
        &self.source
    }

    pub fn target(&self) -> &[Vector3<T>] {
        &self.target
    }

    pub fn noise_bounds(&self) -> &[T] {
        &self.noise_bounds
    }

    /// Copy with every noise bound replaced by `noise_bound`.
    pub fn with_noise_bound(&self, noise_bound: T) -> Result<Self> {
        Self::with_uniform_bound(self.source.clone(), self.target.clone(), noise_bound)
    }
}

/// Rotation plus translation, `b = R a + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<T: Real> {
    pub rotation: Matrix3<T>,
    pub translation: Vector3<T>,
}

pub(crate) fn so3_tolerance<T: Real>() -> T {
    lit::<T>(1e-9).max(T::default_epsilon() * lit(64.0))
}

impl<T: Real> RigidTransform<T> {
    /// Checks `‖RᵀR − I‖_∞ ≤ 1e-9` and `|det R − 1| ≤ 1e-9`.
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Result<Self> {
        let tol = so3_tolerance::<T>();
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        let det = rotation.determinant();
        if !(ortho <= tol) || !((det - T::one()).abs() <= tol) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not a rotation (orthogonality error {ortho}, det {det})"
            )));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("translation is not finite".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rotation * p + self.translation
    }
}

/// Homogenized column-major encoding of a transform; `dim` is 10 or 13.
pub fn vectorize<T: Real>(transform: &RigidTransform<T>, dim: usize) -> Result<DVector<T>> {
    check_dim(dim)?;
    let mut x = DVector::zeros(dim);
    // nalgebra storage is column-major, which is exactly vec(R)
    x.rows_mut(0, 9)
        .copy_from_slice(transform.rotation.as_slice());
    if dim == REGISTRATION_DIM {
        x.rows_mut(9, 3).copy_from(&transform.translation);
    }
    x[dim - 1] = T::one();
    Ok(x)
}

/// Inverse of [`vectorize`]: the raw (unprojected) 3×3 block and the
/// translation (zero for the rotation layout).
pub fn devectorize<T: Real>(x: &DVector<T>) -> Result<(Matrix3<T>, Vector3<T>)> {
    check_dim(x.len())?;
    let m = Matrix3::from_column_slice(&x.as_slice()[..9]);
    let t = if x.len() == REGISTRATION_DIM {
        Vector3::new(x[9], x[10], x[11])
    } else {
        Vector3::zeros()
    };
    Ok((m, t))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim != ROTATION_DIM && dim != REGISTRATION_DIM {
        return Err(Error::InvalidArgument(format!(
            "homogenized dimension must be {ROTATION_DIM} or {REGISTRATION_DIM}, got {dim}"
        )));
    }
    Ok(())
}
