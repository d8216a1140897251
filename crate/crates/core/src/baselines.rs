//! Reference solvers sharing the quadratic-term machinery: weighted least
//! squares and graduated non-convexity (GNC) with Geman-McClure or truncated
//! least squares surrogates.
//!
//! GNC follows the usual black-box recipe. Residuals at the current iterate
//! set a control parameter `μ̂` that makes the surrogate nearly convex; each
//! iteration computes closed-form weights, solves the weighted least squares
//! problem, and moves `μ̂` one step along its schedule toward the true loss.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::GemanMcClureProblem;
use crate::scalar::{lit, Real};
use crate::solver::{
    assemble, aux_from_residuals, check_homogenized, cost_from_residuals, psi_from_residuals,
    solve_assembled, IterationRecord, SolverDiagnostics, SolverResult,
};

/// Minimizes `Σ w_i xᵀ M̃_i x` subject to the homogenized coordinate being one.
pub fn weighted_ls_solve<T: Real>(
    problem: &GemanMcClureProblem<T>,
    weights: &[T],
) -> Result<DVector<T>> {
    if weights.len() != problem.len() {
        return Err(Error::InvalidArgument(format!(
            "got {} weights for {} terms",
            weights.len(),
            problem.len()
        )));
    }
    if weights.iter().any(|&w| !(w >= T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidArgument(
            "weights must be finite and non-negative".into(),
        ));
    }
    if weights.iter().all(|&w| w == T::zero()) {
        return Err(Error::InvalidArgument("all weights are zero".into()));
    }
    solve_assembled(&assemble(problem, weights))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surrogate {
    GemanMcClure,
    TruncatedLeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GncConfig<T: Real> {
    /// Inlier threshold on the weighted residual; the final cost is reported
    /// with the problem's own `c`.
    pub c: T,
    pub surrogate: Surrogate,
    /// Multiplicative step of the control parameter (> 1).
    pub schedule_factor: T,
    pub max_iterations: usize,
    /// Stop once the schedule is done and no weight moves more than this.
    pub weight_tolerance: T,
    pub record_trace: bool,
}

impl<T: Real> GncConfig<T> {
    pub fn new(surrogate: Surrogate) -> Self {
        Self {
            c: T::one(),
            surrogate,
            schedule_factor: lit(1.4),
            max_iterations: 100,
            weight_tolerance: lit(1e-6),
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::zero()) {
            return Err(Error::InvalidArgument("c must be positive".into()));
        }
        if !(self.schedule_factor > T::one()) {
            return Err(Error::InvalidArgument(
                "schedule_factor must exceed 1".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be positive".into(),
            ));
        }
        if !(self.weight_tolerance > T::zero()) {
            return Err(Error::InvalidArgument(
                "weight_tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// GM surrogate weight `(μ̂c² / (s + μ̂c²))²`.
pub fn gm_weight<T: Real>(s: T, c2: T, control: T) -> T {
    let k = control * c2;
    let w = k / (s + k);
    w * w
}

/// TLS surrogate weight for squared residual `s`.
pub fn tls_weight<T: Real>(s: T, c2: T, control: T) -> T {
    let upper = (control + T::one()) / control * c2;
    let lower = control / (control + T::one()) * c2;
    if s >= upper {
        T::zero()
    } else if s <= lower {
        T::one()
    } else {
        let w = (c2 * control * (control + T::one()) / s).sqrt() - control;
        w.clamp(T::zero(), T::one())
    }
}

fn initial_control<T: Real>(surrogate: Surrogate, max_s: T, c2: T) -> T {
    match surrogate {
        // large μ̂ makes the GM surrogate nearly quadratic
        Surrogate::GemanMcClure => (lit::<T>(2.0) * max_s / c2).max(T::one()),
        // small μ̂ makes the TLS surrogate nearly quadratic
        Surrogate::TruncatedLeastSquares => {
            let denom = lit::<T>(2.0) * max_s - c2;
            if denom > T::zero() {
                c2 / denom
            } else {
                // every residual already below the threshold
                T::one() / T::default_epsilon()
            }
        }
    }
}

/// Graduated non-convexity started at `x0`.
pub fn gnc_solve<T: Real>(
    problem: &GemanMcClureProblem<T>,
    x0: &DVector<T>,
    config: &GncConfig<T>,
) -> Result<SolverResult<T>> {
    config.validate()?;
    check_homogenized(problem, x0)?;
    let c2 = problem.c_squared();
    let gnc_c2 = config.c * config.c;

    let mut x = x0.clone();
    x[problem.homog_index()] = T::one();
    let mut s = Vec::with_capacity(problem.len());
    problem.residuals_into(&x, &mut s);

    let max_s = s.iter().fold(T::zero(), |m, &v| m.max(v));
    let mut control = initial_control(config.surrogate, max_s, gnc_c2);
    let mut weights = vec![T::one(); problem.len()];
    let mut trace = config.record_trace.then(Vec::new);
    let mut converged = false;
    let mut iterations = 0;
    let mut psi = T::max_value().unwrap_or_else(T::one);

    while iterations < config.max_iterations {
        iterations += 1;
        let mut max_change = T::zero();
        let mut binary = true;
        for (w, &si) in weights.iter_mut().zip(&s) {
            let next = match config.surrogate {
                Surrogate::GemanMcClure => gm_weight(si, gnc_c2, control),
                Surrogate::TruncatedLeastSquares => tls_weight(si, gnc_c2, control),
            };
            max_change = max_change.max((next - *w).abs());
            binary &= next <= config.weight_tolerance || next >= T::one() - config.weight_tolerance;
            *w = next;
        }

        let aux = aux_from_residuals(&s, c2);
        x = weighted_ls_solve(problem, &weights)?;
        problem.residuals_into(&x, &mut s);
        psi = psi_from_residuals(&s, &aux, c2);
        if let Some(tr) = trace.as_mut() {
            tr.push(IterationRecord {
                cost: cost_from_residuals(&s, c2),
                psi_norm: psi,
            });
        }

        let schedule_done = match config.surrogate {
            Surrogate::GemanMcClure => control <= T::one(),
            Surrogate::TruncatedLeastSquares => binary,
        };
        if schedule_done && max_change <= config.weight_tolerance {
            converged = true;
            break;
        }
        control = match config.surrogate {
            Surrogate::GemanMcClure => (control / config.schedule_factor).max(T::one()),
            Surrogate::TruncatedLeastSquares => control * config.schedule_factor,
        };
    }

    Ok(SolverResult {
        final_cost: cost_from_residuals(&s, c2),
        x,
        iterations,
        converged,
        final_psi_norm: psi,
        trace,
        diagnostics: SolverDiagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_ranges() {
        for &s in &[0.0, 1e-6, 0.3, 1.0, 2.5, 1e3, 1e9] {
            for &mu in &[1e-4f64, 0.1, 1.0, 7.0, 1e5] {
                let g = gm_weight(s, 1.0, mu.max(1.0));
                let t = tls_weight(s, 1.0, mu);
                assert!((0.0..=1.0).contains(&g), "gm {g}");
                assert!((0.0..=1.0).contains(&t), "tls {t}");
            }
        }
        assert_eq!(gm_weight(0.0, 1.0, 1.0), 1.0);
        assert_eq!(tls_weight(0.5, 1.0, 1e6), 1.0);
        assert_eq!(tls_weight(1.5, 1.0, 1e6), 0.0);
    }

    #[test]
    fn tls_weight_is_continuous_at_band_edges() {
        let mu: f64 = 0.8;
        let lower = mu / (mu + 1.0);
        let upper = (mu + 1.0) / mu;
        let eps = 1e-9;
        assert!((tls_weight(lower + eps, 1.0, mu) - 1.0).abs() < 1e-6);
        assert!(tls_weight(upper - eps, 1.0, mu) < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut c = GncConfig::<f64>::new(Surrogate::GemanMcClure);
        assert!(c.validate().is_ok());
        c.schedule_factor = 1.0;
        assert!(c.validate().is_err());
    }
}
