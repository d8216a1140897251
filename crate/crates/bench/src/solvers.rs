//! Uniform front-end over every solver the harness compares.

use std::fmt;
use std::str::FromStr;

use fracgm::baselines::{gnc_solve, GncConfig, Surrogate};
use fracgm::geometry::{
    build_registration_terms, build_rotation_terms, closed_form_alignment, devectorize,
    project_to_so3, solve_registration, solve_rotation, vectorize, REGISTRATION_DIM,
    ROTATION_DIM,
};
use fracgm::{Config, Correspondences, Solution, Transform};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Fracgm,
    GncGm,
    GncTls,
    /// Closed-form least squares, not robust.
    Svd,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Fracgm,
        SolverKind::GncGm,
        SolverKind::GncTls,
        SolverKind::Svd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Fracgm => "fracgm",
            SolverKind::GncGm => "gnc-gm",
            SolverKind::GncTls => "gnc-tls",
            SolverKind::Svd => "svd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| format!("unknown solver '{s}' (expected fracgm, gnc-gm, gnc-tls or svd)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Rotation,
    Registration,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Rotation => "rotation",
            Task::Registration => "registration",
        }
    }

    pub fn with_translation(self) -> bool {
        matches!(self, Task::Registration)
    }
}

/// Solver settings shared across a benchmark.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub c: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub record_trace: bool,
    pub check_spectrum: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = Config::default();
        Self {
            c: d.c,
            max_iterations: d.max_iterations,
            tolerance: d.tolerance,
            record_trace: false,
            check_spectrum: false,
        }
    }
}

impl SolverSettings {
    pub fn fracgm_config(&self) -> Config {
        Config {
            c: self.c,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            record_trace: self.record_trace,
            check_spectrum: self.check_spectrum,
        }
    }

    pub fn gnc_config(&self, surrogate: Surrogate) -> GncConfig<f64> {
        GncConfig {
            c: self.c,
            max_iterations: self.max_iterations,
            record_trace: self.record_trace,
            ..GncConfig::new(surrogate)
        }
    }
}

/// Output of one estimate; iterative solvers also report their run.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub transform: Transform,
    pub solution: Option<Solution>,
}

pub fn estimate(
    kind: SolverKind,
    task: Task,
    corr: &Correspondences,
    settings: &SolverSettings,
) -> fracgm::Result<Estimate> {
    match kind {
        SolverKind::Svd => Ok(Estimate {
            transform: closed_form_alignment(corr, task.with_translation())?,
            solution: None,
        }),
        SolverKind::Fracgm => {
            let cfg = settings.fracgm_config();
            let (transform, solution) = match task {
                Task::Rotation => solve_rotation(corr, &cfg)?,
                Task::Registration => solve_registration(corr, &cfg)?,
            };
            Ok(Estimate {
                transform,
                solution: Some(solution),
            })
        }
        SolverKind::GncGm | SolverKind::GncTls => {
            let surrogate = if kind == SolverKind::GncGm {
                Surrogate::GemanMcClure
            } else {
                Surrogate::TruncatedLeastSquares
            };
            let init = closed_form_alignment(corr, task.with_translation())?;
            let (problem, x0) = match task {
                Task::Rotation => (
                    build_rotation_terms(corr, settings.c)?,
                    vectorize(&init, ROTATION_DIM)?,
                ),
                Task::Registration => (
                    build_registration_terms(corr, settings.c)?,
                    vectorize(&init, REGISTRATION_DIM)?,
                ),
            };
            let solution = gnc_solve(&problem, &x0, &settings.gnc_config(surrogate))?;
            let (relaxed, translation) = devectorize(&solution.x)?;
            Ok(Estimate {
                transform: Transform {
                    rotation: project_to_so3(&relaxed),
                    translation,
                },
                solution: Some(solution),
            })
        }
    }
}

/// Parses a comma-separated solver list.
pub fn parse_solver_list(s: &str) -> Result<Vec<SolverKind>, String> {
    let kinds = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(SolverKind::from_str)
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err("solver list is empty".into());
    }
    Ok(kinds)
}
