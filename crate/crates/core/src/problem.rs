//! Sum-of-ratio Geman-McClure problems with quadratic residuals.
//!
//! Every residual is a quadratic form `r_i²(x) = xᵀ M̃_i x` over a homogenized
//! variable whose last coordinate is pinned to one. The noise weight
//! `1/σ_i²` is folded into `M̃_i` when a term is built, so the solver only
//! ever deals with dimensionless residuals and the threshold `c`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// One weighted residual matrix `M̃_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTerm<T: Real> {
    matrix: DMatrix<T>,
}

impl<T: Real> QuadraticTerm<T> {
    /// Wraps an arbitrary matrix after checking that it is square, symmetric
    /// and positive semidefinite.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "quadratic term must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "quadratic term has non-finite entries".into(),
            ));
        }
        let d = matrix.nrows();
        let scale = T::one().max(matrix.amax());
        let sym_tol = symmetry_tolerance::<T>() * scale;
        for q in 0..d {
            for p in (q + 1)..d {
                if (matrix[(p, q)] - matrix[(q, p)]).abs() > sym_tol {
                    return Err(Error::InvalidArgument(format!(
                        "quadratic term is not symmetric at ({p}, {q})"
                    )));
                }
            }
        }
        let trace = matrix.trace();
        let min_eig = SymmetricEigen::new(matrix.clone()).eigenvalues.min();
        if min_eig < -symmetry_tolerance::<T>() * trace.abs() {
            return Err(Error::InvalidArgument(
                "quadratic term is not positive semidefinite".into(),
            ));
        }
        Ok(Self { matrix })
    }

    /// Builds `weight · BᵀB` from a factor `B` (rows × d). The result is PSD
    /// by construction, so no spectral check is performed.
    pub fn from_factor(factor: &DMatrix<T>, weight: T) -> Result<Self> {
        if !(weight > T::zero()) || !weight.is_finite() {
            return Err(Error::InvalidArgument(
                "term weight must be positive and finite".into(),
            ));
        }
        let d = factor.ncols();
        let mut matrix = factor.tr_mul(factor);
        matrix *= weight;
        // exact symmetry
        for q in 0..d {
            for p in (q + 1)..d {
                let v = matrix[(p, q)];
                matrix[(q, p)] = v;
            }
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Squared weighted residual `xᵀ M̃ x`, clamped at zero against roundoff.
    #[inline]
    pub fn evaluate(&self, x: &[T]) -> T {
        let d = self.matrix.nrows();
        let m = self.matrix.as_slice();
        let mut acc = T::zero();
        for (q, &xq) in x.iter().enumerate().take(d) {
            let col = &m[q * d..(q + 1) * d];
            let mut inner = T::zero();
            for (&mpq, &xp) in col.iter().zip(x) {
                inner += mpq * xp;
            }
            acc += xq * inner;
        }
        acc.max(T::zero())
    }

    /// Returns a copy scaled by `kappa`.
    pub fn scaled(&self, kappa: T) -> Self {
        Self {
            matrix: &self.matrix * kappa,
        }
    }
}

fn symmetry_tolerance<T: Real>() -> T {
    // 1e-9 for f64; loosened to a few ulps-at-scale for f32.
    lit::<T>(1e-9).max(T::default_epsilon() * lit(64.0))
}

/// A complete sum-of-ratio instance: `min Σ c²·s_i/(s_i + c²)` subject to the
/// homogenized coordinate being one.
#[derive(Debug, Clone, PartialEq)]
pub struct GemanMcClureProblem<T: Real> {
    terms: Vec<QuadraticTerm<T>>,
    c: T,
    dim: usize,
}

impl<T: Real> GemanMcClureProblem<T> {
    pub fn new(terms: Vec<QuadraticTerm<T>>, c: T) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidArgument(
                "problem needs at least one term".into(),
            ));
        };
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidArgument(
                "threshold c must be positive and finite".into(),
            ));
        }
        let dim = first.dim();
        if dim < 2 {
            return Err(Error::InvalidArgument(
                "variable dimension must be at least 2 (one free coordinate plus homogenization)"
                    .into(),
            ));
        }
        if let Some(i) = terms.iter().position(|t| t.dim() != dim) {
            return Err(Error::InvalidArgument(format!(
                "term {i} has dimension {} but term 0 has {dim}",
                terms[i].dim()
            )));
        }
        Ok(Self { terms, c, dim })
    }

    pub fn terms(&self) -> &[QuadraticTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn c_squared(&self) -> T {
        self.c * self.c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the homogenized coordinate; always the last one.
    pub fn homog_index(&self) -> usize {
        self.dim - 1
    }

    /// Same terms with a different threshold.
    pub fn with_threshold(&self, c: T) -> Result<Self> {
        Self::new(self.terms.clone(), c)
    }

    pub(crate) fn check_dim(&self, x: &DVector<T>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "vector has length {} but problem dimension is {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Fills `out` with `s_i = xᵀ M̃_i x` for every term.
    pub(crate) fn residuals_into(&self, x: &DVector<T>, out: &mut Vec<T>) {
        out.clear();
        let xs = x.as_slice();
        out.extend(self.terms.iter().map(|t| t.evaluate(xs)));
    }

    /// Squared weighted residuals at `x`.
    pub fn residuals(&self, x: &DVector<T>) -> Result<Vec<T>> {
        self.check_dim(x)?;
        let mut out = Vec::with_capacity(self.terms.len());
        self.residuals_into(x, &mut out);
        Ok(out)
    }
}

/// Auxiliary variables `β` (ratio values) and `μ` (inverse denominators).
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryVariables<T: Real> {
    pub beta: Vec<T>,
    pub mu: Vec<T>,
}

impl<T: Real> AuxiliaryVariables<T> {
    pub fn new(beta: Vec<T>, mu: Vec<T>) -> Result<Self> {
        if beta.len() != mu.len() {
            return Err(Error::InvalidArgument(format!(
                "beta has length {} but mu has length {}",
                beta.len(),
                mu.len()
            )));
        }
        Ok(Self { beta, mu })
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// Number of indices breaking `μ_i > 0` or `0 ≤ β_i < c²`.
    pub fn violations(&self, c_squared: T) -> usize {
        self.beta
            .iter()
            .zip(&self.mu)
            .filter(|(&b, &m)| !(m > T::zero() && b >= T::zero() && b < c_squared))
            .count()
    }

    /// Per-term coefficient `μ_i (c² − β_i)` of the weighted quadratic.
    pub fn coefficients(&self, c_squared: T) -> Vec<T> {
        self.beta
            .iter()
            .zip(&self.mu)
            .map(|(&b, &m)| m * (c_squared - b))
            .collect()
    }
}
