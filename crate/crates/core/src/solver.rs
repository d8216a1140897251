//! Alternating minimization for Geman-McClure sum-of-ratio problems.
//!
//! Each iteration first refreshes the auxiliary variables in closed form from
//! the previous iterate,
//!
//! ```text
//! β_i = c² s_i / (s_i + c²),   μ_i = 1 / (s_i + c²),   s_i = xᵀ M̃_i x,
//! ```
//!
//! and then minimizes the convex quadratic `Σ μ_i (f_i(x) − β_i h_i(x))` on the
//! hyperplane `eᵀx = 1`, where `f_i = c² s_i` and `h_i = s_i + c²`. Because
//! `s_i ≥ 0`, the refreshed variables always satisfy `μ_i > 0` and
//! `0 ≤ β_i < c²`, which keeps every quadratic subproblem convex.
//!
//! The loop stops once the stacked root condition
//! `ψ(α, x) = (−f_i + β_i h_i, −1 + μ_i h_i)_i` vanishes. The `f`-rows are
//! divided by `h_i` so both row families are dimensionless, and the test is
//! `‖ψ‖_∞ ≤ tolerance`.
//!
//! A fixed point is a KKT point of the dual subproblem. It is a global
//! minimizer of the relaxed problem when the root of `ψ(α, x_α) = 0` is
//! unique, e.g. when `ψ` is differentiable and Lipschitz in `α`; those
//! conditions are data dependent and are not checked at runtime.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::problem::{AuxiliaryVariables, GemanMcClureProblem};
use crate::scalar::{lit, Real};

/// Iteration controls for [`fracgm_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T: Real> {
    /// Geman-McClure threshold used when a front-end builds the problem.
    /// [`fracgm_solve`] itself reads `c` from the problem.
    pub c: T,
    pub max_iterations: usize,
    /// Bound on the normalized `‖ψ‖_∞`.
    pub tolerance: T,
    /// Record `(cost, ψ-norm)` after every iteration.
    pub record_trace: bool,
    /// Compute the smallest eigenvalue of the assembled quadratic every
    /// iteration and count PSD violations. Costs one small eigensolve per
    /// iteration.
    pub check_spectrum: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            c: T::one(),
            max_iterations: 100,
            tolerance: lit(1e-7),
            record_trace: false,
            check_spectrum: false,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::zero()) || !self.c.is_finite() {
            return Err(Error::InvalidArgument("c must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One entry of the optional convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T: Real> {
    /// Geman-McClure objective at the iterate.
    pub cost: T,
    /// Normalized `‖ψ‖_∞` of the iterate against the auxiliary variables that
    /// produced it.
    pub psi_norm: T,
}

/// Runtime bookkeeping of the convexity invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverDiagnostics<T: Real> {
    /// Total count of `(iteration, i)` pairs breaking `μ_i > 0, 0 ≤ β_i < c²`.
    pub aux_violations: usize,
    /// Iterations whose assembled matrix had `λ_min < −1e-9·trace`.
    /// Only populated when `check_spectrum` is set.
    pub spectrum_violations: usize,
    /// Smallest observed `λ_min(A) / trace(A)`, when `check_spectrum` is set.
    pub min_spectrum_ratio: Option<T>,
}

impl<T: Real> Default for SolverDiagnostics<T> {
    fn default() -> Self {
        Self {
            aux_violations: 0,
            spectrum_violations: 0,
            min_spectrum_ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult<T: Real> {
    /// Homogenized solution; the last coordinate is exactly one.
    pub x: DVector<T>,
    pub iterations: usize,
    pub converged: bool,
    pub final_psi_norm: T,
    pub final_cost: T,
    pub trace: Option<Vec<IterationRecord<T>>>,
    pub diagnostics: SolverDiagnostics<T>,
}

#[inline]
fn gm_ratio<T: Real>(s: T, c2: T) -> T {
    c2 * s / (s + c2)
}

/// Geman-McClure objective `Σ c² s_i / (s_i + c²)`.
pub fn gm_cost<T: Real>(problem: &GemanMcClureProblem<T>, x: &DVector<T>) -> Result<T> {
    let s = problem.residuals(x)?;
    Ok(cost_from_residuals(&s, problem.c_squared()))
}

pub(crate) fn cost_from_residuals<T: Real>(s: &[T], c2: T) -> T {
    s.iter().fold(T::zero(), |acc, &si| acc + gm_ratio(si, c2))
}

/// Closed-form root of `ψ(·, x) = 0` in the auxiliary variables.
pub fn update_auxiliary<T: Real>(
    problem: &GemanMcClureProblem<T>,
    x: &DVector<T>,
) -> Result<AuxiliaryVariables<T>> {
    let s = problem.residuals(x)?;
    Ok(aux_from_residuals(&s, problem.c_squared()))
}

pub(crate) fn aux_from_residuals<T: Real>(s: &[T], c2: T) -> AuxiliaryVariables<T> {
    let mut beta = Vec::with_capacity(s.len());
    let mut mu = Vec::with_capacity(s.len());
    for &si in s {
        let h = si + c2;
        beta.push(c2 * si / h);
        mu.push(T::one() / h);
    }
    AuxiliaryVariables { beta, mu }
}

/// Normalized `‖ψ(α, x)‖_∞`.
pub fn psi_norm<T: Real>(
    problem: &GemanMcClureProblem<T>,
    aux: &AuxiliaryVariables<T>,
    x: &DVector<T>,
) -> Result<T> {
    check_aux_len(problem, aux)?;
    let s = problem.residuals(x)?;
    Ok(psi_from_residuals(&s, aux, problem.c_squared()))
}

pub(crate) fn psi_from_residuals<T: Real>(s: &[T], aux: &AuxiliaryVariables<T>, c2: T) -> T {
    let mut worst = T::zero();
    for ((&si, &b), &m) in s.iter().zip(&aux.beta).zip(&aux.mu) {
        let h = si + c2;
        let f_row = (b * h - c2 * si).abs() / h;
        let mu_row = (m * h - T::one()).abs();
        worst = worst.max(f_row).max(mu_row);
    }
    worst
}

fn check_aux_len<T: Real>(
    problem: &GemanMcClureProblem<T>,
    aux: &AuxiliaryVariables<T>,
) -> Result<()> {
    if aux.len() != problem.len() || aux.mu.len() != aux.beta.len() {
        return Err(Error::InvalidArgument(format!(
            "auxiliary variables have length {} but the problem has {} terms",
            aux.len(),
            problem.len()
        )));
    }
    Ok(())
}

/// Minimizer of `Σ μ_i (f_i(x) − β_i h_i(x))` subject to `eᵀx = 1`.
///
/// Equal to `A⁻¹e / (eᵀA⁻¹e)` with `A = Σ μ_i (c² − β_i) M̃_i`. The solve
/// eliminates the homogenized coordinate through the Schur complement, so the
/// free block `A_zz` is factorized instead of `A` itself; this stays well
/// posed on noise-free data where `A` is exactly singular.
pub fn solve_weighted_quadratic<T: Real>(
    problem: &GemanMcClureProblem<T>,
    aux: &AuxiliaryVariables<T>,
) -> Result<DVector<T>> {
    check_aux_len(problem, aux)?;
    let c2 = problem.c_squared();
    if aux.violations(c2) > 0 {
        return Err(Error::InvalidArgument(
            "auxiliary variables violate mu > 0, 0 <= beta < c^2".into(),
        ));
    }
    let a = assemble(problem, &aux.coefficients(c2));
    solve_assembled(&a)
}

/// `A = Σ w_i M̃_i`, accumulated over the upper triangle and mirrored.
pub(crate) fn assemble<T: Real>(problem: &GemanMcClureProblem<T>, weights: &[T]) -> DMatrix<T> {
    let d = problem.dim();
    let mut acc = vec![T::zero(); d * d];
    for (term, &w) in problem.terms().iter().zip(weights) {
        if w == T::zero() {
            continue;
        }
        let m = term.matrix().as_slice();
        for q in 0..d {
            let col = q * d;
            for p in 0..=q {
                acc[col + p] += w * m[col + p];
            }
        }
    }
    for q in 0..d {
        for p in (q + 1)..d {
            acc[q * d + p] = acc[p * d + q];
        }
    }
    DMatrix::from_vec(d, d, acc)
}

/// Solves the equality-constrained quadratic for an assembled `A`.
pub(crate) fn solve_assembled<T: Real>(a: &DMatrix<T>) -> Result<DVector<T>> {
    let d = a.nrows();
    let h = d - 1;
    let trace = a.trace();
    if !(trace > T::zero()) || !trace.is_finite() {
        return Err(Error::DegenerateProblem(
            "weighted quadratic is identically zero or non-finite".into(),
        ));
    }
    let lambda = lit::<T>(1e-12) * trace / lit(d as f64);
    let mut a_zz = a.view((0, 0), (h, h)).into_owned();
    for i in 0..h {
        a_zz[(i, i)] += lambda;
    }
    let rhs = -a.view((0, h), (h, 1)).column(0).into_owned();

    let z = match a_zz.clone().cholesky() {
        Some(chol) => {
            // every Cholesky pivot bounds λ_min from above, so a pivot at the
            // level of the guard means the free block is numerically singular
            let min_pivot = chol
                .l_dirty()
                .diagonal()
                .iter()
                .fold(T::max_value().unwrap_or_else(T::one), |m, &l| m.min(l * l));
            if min_pivot <= lit::<T>(1e3) * lambda {
                return Err(Error::DegenerateProblem(
                    "free block of the weighted quadratic is rank deficient; too few non-degenerate correspondences"
                        .into(),
                ));
            }
            chol.solve(&rhs)
        }
        None => a_zz.full_piv_lu().solve(&rhs).ok_or_else(|| {
            Error::DegenerateProblem(
                "free block of the weighted quadratic is singular; too few non-degenerate correspondences"
                    .into(),
            )
        })?,
    };

    let mut x = DVector::zeros(d);
    x.rows_mut(0, h).copy_from(&z);
    x[h] = T::one();
    // |eᵀA⁻¹e| < 1e-12·‖A⁻¹e‖  ⇔  ‖x‖ > 1e12
    let norm = x.norm();
    if !norm.is_finite() || norm > lit(1e12) {
        return Err(Error::DegenerateProblem(
            "homogenization pivot vanishes; solution is unbounded".into(),
        ));
    }
    Ok(x)
}

pub(crate) fn spectrum_ratio<T: Real>(a: &DMatrix<T>) -> T {
    let trace = a.trace();
    let min = SymmetricEigen::new(a.clone()).eigenvalues.min();
    if trace > T::zero() {
        min / trace
    } else {
        min
    }
}

pub(crate) fn check_homogenized<T: Real>(
    problem: &GemanMcClureProblem<T>,
    x: &DVector<T>,
) -> Result<()> {
    problem.check_dim(x)?;
    let last = x[problem.homog_index()];
    if (last - T::one()).abs() > T::default_epsilon().sqrt() {
        return Err(Error::InvalidArgument(format!(
            "initial guess is not homogenized (last coordinate {last})"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial guess is not finite".into()));
    }
    Ok(())
}

/// Runs the alternation from `x0` until `‖ψ‖_∞ ≤ tolerance` or the iteration
/// cap is hit.
pub fn fracgm_solve<T: Real>(
    problem: &GemanMcClureProblem<T>,
    x0: &DVector<T>,
    config: &SolverConfig<T>,
) -> Result<SolverResult<T>> {
    config.validate()?;
    check_homogenized(problem, x0)?;
    let c2 = problem.c_squared();
    let h = problem.homog_index();

    let mut x = x0.clone();
    x[h] = T::one();
    let mut s = Vec::with_capacity(problem.len());
    problem.residuals_into(&x, &mut s);

    let mut diagnostics = SolverDiagnostics::<T>::default();
    let mut trace = config.record_trace.then(Vec::new);
    let mut psi = T::max_value().unwrap_or_else(T::one);
    let mut converged = false;
    let mut iterations = 0;
    let spectrum_floor = -lit::<T>(1e-9);

    while iterations < config.max_iterations {
        iterations += 1;
        let aux = aux_from_residuals(&s, c2);
        let violations = aux.violations(c2);
        debug_assert_eq!(violations, 0, "auxiliary constraints broken");
        diagnostics.aux_violations += violations;

        let a = assemble(problem, &aux.coefficients(c2));
        if config.check_spectrum {
            let ratio = spectrum_ratio(&a);
            if ratio < spectrum_floor {
                diagnostics.spectrum_violations += 1;
            }
            diagnostics.min_spectrum_ratio = Some(match diagnostics.min_spectrum_ratio {
                Some(r) => r.min(ratio),
                None => ratio,
            });
        }
        x = solve_assembled(&a)?;

        problem.residuals_into(&x, &mut s);
        psi = psi_from_residuals(&s, &aux, c2);
        if let Some(tr) = trace.as_mut() {
            tr.push(IterationRecord {
                cost: cost_from_residuals(&s, c2),
                psi_norm: psi,
            });
        }
        if psi <= config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(SolverResult {
        final_cost: cost_from_residuals(&s, c2),
        x,
        iterations,
        converged,
        final_psi_norm: psi,
        trace,
        diagnostics,
    })
}
