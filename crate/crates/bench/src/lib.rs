//! Benchmark harness for the fracgm solvers: seeded Monte-Carlo grids over
//! outlier rates, noise-bound sweeps, convergence traces and timing, written
//! out as CSV.

pub mod harness;
pub mod report;
pub mod solvers;

pub use harness::{
    fit_loglog_exponent, iterations_to_within, run_convergence, run_grid, run_noise_sweep,
    run_timing, ConvergenceRecord, ConvergenceReport, GridSpec, RunRecord, TimingRow, TraceRow,
};
pub use report::{performance_profile, summarize, ProfileRow, SummaryRow};
pub use solvers::{estimate, parse_solver_list, Estimate, SolverKind, SolverSettings, Task};
