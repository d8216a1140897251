//! Monte-Carlo experiment runners.
//!
//! Every run owns its scene, generated from `base_seed + run`, and its solver
//! state. Runs execute on the rayon pool and are collected in grid order, so
//! the output does not depend on scheduling.

use std::time::Instant;

use fracgm::geometry::{rotation_error_deg, translation_error};
use fracgm::synthetic::{generate_scene, PointSource, SceneConfig};
use fracgm::{Correspondences, Scene};
use rayon::prelude::*;
use serde::Serialize;

use crate::solvers::{estimate, SolverKind, SolverSettings, Task};

/// One solver on one scene.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub scenario: String,
    pub solver: SolverKind,
    pub outlier_rate: f64,
    pub noise_bound: f64,
    pub n_points: usize,
    pub run: usize,
    pub seed: u64,
    pub rotation_error_deg: Option<f64>,
    pub translation_error_m: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: f64,
    pub converged: Option<bool>,
    pub final_cost: Option<f64>,
    /// Stable error code when the solver failed.
    pub error: Option<&'static str>,
    pub aux_violations: Option<usize>,
    pub spectrum_violations: Option<usize>,
    pub min_spectrum_ratio: Option<f64>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// Scene grid shared by all scenarios.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub task: Task,
    pub outlier_rates: Vec<f64>,
    pub n_points: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub noise_sigma: f64,
    pub noise_bound: f64,
    pub source: PointSource,
    pub solvers: Vec<SolverKind>,
    pub settings: SolverSettings,
}

impl GridSpec {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            outlier_rates: vec![0.2, 0.4, 0.6, 0.8],
            n_points: 100,
            runs: 40,
            base_seed: 0,
            noise_sigma: 0.01,
            noise_bound: 0.1,
            source: PointSource::RandomCube,
            solvers: SolverKind::ALL.to_vec(),
            settings: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.runs == 0 {
            return Err("runs must be at least 1".into());
        }
        if self.outlier_rates.is_empty() {
            return Err("outlier rate grid is empty".into());
        }
        if self.solvers.is_empty() {
            return Err("solver list is empty".into());
        }
        if !(self.settings.c > 0.0) || !self.settings.c.is_finite() {
            return Err("c must be positive".into());
        }
        for &rate in &self.outlier_rates {
            self.scene_config(rate, 0)
                .validate()
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    pub fn scene_config(&self, outlier_rate: f64, run: usize) -> SceneConfig {
        SceneConfig {
            n_points: self.n_points,
            outlier_rate,
            noise_sigma: self.noise_sigma,
            with_translation: self.task.with_translation(),
            noise_bound: self.noise_bound,
            seed: self.seed(run),
            source: self.source.clone(),
            ..SceneConfig::default()
        }
    }
}

/// Runs one solver on one set of correspondences and scores it against the
/// scene's ground truth.
pub fn evaluate(
    scenario: &str,
    kind: SolverKind,
    task: Task,
    scene: &Scene,
    corr: &Correspondences,
    settings: &SolverSettings,
    run: usize,
) -> RunRecord {
    let start = Instant::now();
    let outcome = estimate(kind, task, corr, settings);
    let wall_time_s = start.elapsed().as_secs_f64();
    let mut record = RunRecord {
        scenario: scenario.to_string(),
        solver: kind,
        outlier_rate: scene.config.outlier_rate,
        noise_bound: corr.noise_bounds()[0],
        n_points: corr.len(),
        run,
        seed: scene.config.seed,
        rotation_error_deg: None,
        translation_error_m: None,
        iterations: None,
        wall_time_s,
        converged: None,
        final_cost: None,
        error: None,
        aux_violations: None,
        spectrum_violations: None,
        min_spectrum_ratio: None,
    };
    match outcome {
        Ok(est) => {
            let gt = &scene.ground_truth;
            record.rotation_error_deg = Some(rotation_error_deg(&est.transform.rotation, &gt.rotation));
            if task.with_translation() {
                record.translation_error_m =
                    Some(translation_error(&est.transform.translation, &gt.translation));
            }
            if let Some(sol) = est.solution {
                record.iterations = Some(sol.iterations);
                record.converged = Some(sol.converged);
                record.final_cost = Some(sol.final_cost);
                if kind == SolverKind::Fracgm {
                    record.aux_violations = Some(sol.diagnostics.aux_violations);
                    if settings.check_spectrum {
                        record.spectrum_violations = Some(sol.diagnostics.spectrum_violations);
                        record.min_spectrum_ratio = sol.diagnostics.min_spectrum_ratio;
                    }
                }
            }
        }
        Err(e) => record.error = Some(e.code()),
    }
    record
}

/// Outlier-rate grid: every solver on every `(rate, run)` scene.
pub fn run_grid(spec: &GridSpec) -> fracgm::Result<Vec<RunRecord>> {
    let jobs: Vec<(f64, usize)> = spec
        .outlier_rates
        .iter()
        .flat_map(|&rate| (0..spec.runs).map(move |run| (rate, run)))
        .collect();
    let scenario = spec.task.name();
    let per_job = jobs
        .par_iter()
        .map(|&(rate, run)| {
            let scene: Scene = generate_scene(&spec.scene_config(rate, run))?;
            Ok(spec
                .solvers
                .iter()
                .map(|&kind| {
                    evaluate(
                        scenario,
                        kind,
                        spec.task,
                        &scene,
                        &scene.correspondences,
                        &spec.settings,
                        run,
                    )
                })
                .collect::<Vec<_>>())
        })
        .collect::<fracgm::Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Same scenes evaluated under several noise bounds. Uses the first entry of
/// `spec.outlier_rates`.
pub fn run_noise_sweep(spec: &GridSpec, noise_bounds: &[f64]) -> fracgm::Result<Vec<RunRecord>> {
    let rate = spec.outlier_rates[0];
    let per_run = (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let scene: Scene = generate_scene(&spec.scene_config(rate, run))?;
            let mut rows = Vec::new();
            for &bound in noise_bounds {
                let corr = scene.correspondences.with_noise_bound(bound)?;
                for &kind in &spec.solvers {
                    rows.push(evaluate(
                        "noise-sweep",
                        kind,
                        spec.task,
                        &scene,
                        &corr,
                        &spec.settings,
                        run,
                    ));
                }
            }
            Ok(rows)
        })
        .collect::<fracgm::Result<Vec<_>>>()?;
    Ok(per_run.into_iter().flatten().collect())
}

/// One point of an iteration trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub solver: SolverKind,
    pub run: usize,
    pub seed: u64,
    pub iteration: usize,
    pub gm_cost: f64,
    pub psi_norm: f64,
}

/// Per-run convergence comparison between FracGM and GNC-GM.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub run: usize,
    pub seed: u64,
    pub fracgm_iterations: usize,
    pub fracgm_iterations_to_1pct: usize,
    pub fracgm_final_cost: f64,
    pub gnc_gm_iterations: usize,
    pub gnc_gm_iterations_to_1pct: usize,
    pub gnc_gm_final_cost: f64,
    pub fracgm_aux_violations: usize,
    pub fracgm_spectrum_violations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub traces: Vec<TraceRow>,
    pub runs: Vec<ConvergenceRecord>,
}

/// First 1-based iteration whose cost is within `rel` of the final cost.
pub fn iterations_to_within(costs: &[f64], rel: f64) -> usize {
    let Some(&last) = costs.last() else {
        return 0;
    };
    let band = rel * last.abs();
    costs
        .iter()
        .position(|&c| (c - last).abs() <= band)
        .map_or(costs.len(), |i| i + 1)
}

/// Iteration traces of FracGM and GNC-GM on the same scenes. Uses the first
/// entry of `spec.outlier_rates`; the solver list is ignored.
pub fn run_convergence(spec: &GridSpec) -> fracgm::Result<ConvergenceReport> {
    let rate = spec.outlier_rates[0];
    let settings = SolverSettings {
        record_trace: true,
        ..spec.settings
    };
    let per_run = (0..spec.runs)
        .into_par_iter()
        .map(|run| {
            let scene: Scene = generate_scene(&spec.scene_config(rate, run))?;
            let corr = &scene.correspondences;
            let frac = estimate(SolverKind::Fracgm, spec.task, corr, &settings)?
                .solution
                .expect("iterative solver");
            let gnc = estimate(SolverKind::GncGm, spec.task, corr, &settings)?
                .solution
                .expect("iterative solver");

            let mut traces = Vec::new();
            let mut costs = |kind: SolverKind, sol: &fracgm::Solution| -> Vec<f64> {
                let trace = sol.trace.as_deref().unwrap_or_default();
                for (i, rec) in trace.iter().enumerate() {
                    traces.push(TraceRow {
                        solver: kind,
                        run,
                        seed: scene.config.seed,
                        iteration: i + 1,
                        gm_cost: rec.cost,
                        psi_norm: rec.psi_norm,
                    });
                }
                trace.iter().map(|r| r.cost).collect()
            };
            let frac_costs = costs(SolverKind::Fracgm, &frac);
            let gnc_costs = costs(SolverKind::GncGm, &gnc);
            let record = ConvergenceRecord {
                run,
                seed: scene.config.seed,
                fracgm_iterations: frac.iterations,
                fracgm_iterations_to_1pct: iterations_to_within(&frac_costs, 0.01),
                fracgm_final_cost: frac.final_cost,
                gnc_gm_iterations: gnc.iterations,
                gnc_gm_iterations_to_1pct: iterations_to_within(&gnc_costs, 0.01),
                gnc_gm_final_cost: gnc.final_cost,
                fracgm_aux_violations: frac.diagnostics.aux_violations,
                fracgm_spectrum_violations: frac.diagnostics.spectrum_violations,
            };
            Ok((traces, record))
        })
        .collect::<fracgm::Result<Vec<_>>>()?;

    let mut report = ConvergenceReport::default();
    for (traces, record) in per_run {
        report.traces.extend(traces);
        report.runs.push(record);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub n_points: usize,
    pub runs: usize,
    pub mean_time_s: f64,
    pub median_time_s: f64,
    pub mean_iterations: f64,
}

/// Wall time of single-threaded FracGM registration solves. Only the solve
/// call is timed.
pub fn run_timing(spec: &GridSpec, sizes: &[usize]) -> fracgm::Result<Vec<TimingRow>> {
    let rate = spec.outlier_rates[0];
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sized = GridSpec {
            n_points: n,
            ..spec.clone()
        };
        let mut times = Vec::with_capacity(spec.runs);
        let mut iterations = 0usize;
        for run in 0..spec.runs {
            let scene: Scene = generate_scene(&sized.scene_config(rate, run))?;
            let start = Instant::now();
            let est = estimate(SolverKind::Fracgm, spec.task, &scene.correspondences, &spec.settings)?;
            times.push(start.elapsed().as_secs_f64());
            iterations += est.solution.map_or(0, |s| s.iterations);
        }
        rows.push(TimingRow {
            n_points: n,
            runs: spec.runs,
            mean_time_s: crate::report::mean(&times),
            median_time_s: crate::report::quantile(&times, 0.5),
            mean_iterations: iterations as f64 / spec.runs as f64,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `log t` against `log n`.
pub fn fit_loglog_exponent(rows: &[TimingRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n_points as f64).ln(), r.mean_time_s.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{group, mean, performance_profile, summarize, write_csv};

    #[test]
    fn iterations_to_within_is_one_based() {
        assert_eq!(iterations_to_within(&[10.0, 5.0, 4.02, 4.0], 0.01), 3);
        assert_eq!(iterations_to_within(&[4.0], 0.01), 1);
        assert_eq!(iterations_to_within(&[], 0.01), 0);
    }

    #[test]
    fn exponent_of_power_law() {
        let rows: Vec<TimingRow> = [100usize, 1000, 10000]
            .iter()
            .map(|&n| TimingRow {
                n_points: n,
                runs: 1,
                mean_time_s: 3e-6 * (n as f64).powf(1.1),
                median_time_s: 0.0,
                mean_iterations: 0.0,
            })
            .collect();
        assert!((fit_loglog_exponent(&rows) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        let mut g = GridSpec::new(Task::Rotation);
        assert!(g.validate().is_ok());
        g.runs = 0;
        assert!(g.validate().is_err());
        g.runs = 1;
        g.outlier_rates = vec![1.0];
        assert!(g.validate().is_err());
    }

    fn small(task: Task, rates: &[f64]) -> GridSpec {
        GridSpec {
            outlier_rates: rates.to_vec(),
            n_points: 60,
            runs: 8,
            base_seed: 77,
            noise_bound: 0.1,
            ..GridSpec::new(task)
        }
    }

    #[test]
    fn results_do_not_depend_on_the_thread_pool() {
        let spec = small(Task::Registration, &[0.3, 0.6]);
        let parallel = run_grid(&spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run_grid(&spec).unwrap());
        assert_eq!(parallel.len(), 2 * 8 * SolverKind::ALL.len());
        for (a, b) in parallel.iter().zip(&serial) {
            assert_eq!((a.solver, a.seed, a.outlier_rate), (b.solver, b.seed, b.outlier_rate));
            assert_eq!(a.rotation_error_deg, b.rotation_error_deg);
            assert_eq!(a.translation_error_m, b.translation_error_m);
            assert_eq!(a.iterations, b.iterations);
        }
    }

    #[test]
    fn rows_carry_their_seed_and_are_rerunnable() {
        let spec = small(Task::Rotation, &[0.4]);
        let all = run_grid(&spec).unwrap();
        let row = all.iter().find(|r| r.run == 5 && r.solver == SolverKind::Fracgm).unwrap();
        assert_eq!(row.seed, 77 + 5);
        let alone = run_grid(&GridSpec { runs: 1, base_seed: row.seed, ..spec }).unwrap();
        let again = alone.iter().find(|r| r.solver == SolverKind::Fracgm).unwrap();
        assert_eq!(again.rotation_error_deg, row.rotation_error_deg);
    }

    #[test]
    fn outlier_free_errors_are_small_for_every_solver() {
        for task in [Task::Rotation, Task::Registration] {
            let records = run_grid(&GridSpec { n_points: 100, ..small(task, &[0.0]) }).unwrap();
            for rows in group(&records) {
                let rot: Vec<f64> = rows.iter().map(|r| r.rotation_error_deg.unwrap()).collect();
                assert!(mean(&rot) < 0.5, "{:?} {}", rows[0].solver, mean(&rot));
                if task == Task::Registration {
                    let t: Vec<f64> = rows.iter().map(|r| r.translation_error_m.unwrap()).collect();
                    assert!(mean(&t) < 0.05);
                }
            }
        }
    }

    #[test]
    fn summaries_and_profiles_cover_every_group() {
        let records = run_grid(&small(Task::Registration, &[0.2, 0.5])).unwrap();
        let summary = summarize(&records);
        // rotation and translation rows per (solver, rate)
        assert_eq!(summary.len(), 2 * 2 * SolverKind::ALL.len());
        for row in &summary {
            assert_eq!(row.count, 8);
            assert!(row.p25 <= row.p50 && row.p50 <= row.p75 && row.p75 <= row.p95);
            assert_eq!(row.median, row.p50);
        }
        let profile = performance_profile(&records);
        for w in profile.windows(2).filter(|w| w[0].solver == w[1].solver && w[0].outlier_rate == w[1].outlier_rate) {
            assert!(w[0].fraction <= w[1].fraction);
        }
    }

    #[test]
    fn csv_has_a_stable_header() {
        let records = run_grid(&GridSpec { runs: 2, ..small(Task::Rotation, &[0.2]) }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        write_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "scenario,solver,outlier_rate,noise_bound,n_points,run,seed,rotation_error_deg,translation_error_m,iterations,wall_time_s,converged,final_cost,error,aux_violations,spectrum_violations,min_spectrum_ratio"
        );
        assert_eq!(text.lines().count(), 1 + records.len());
        assert!(text.contains(",svd,") && text.contains(",gnc-tls,"));
    }

    #[test]
    fn convergence_traces_are_consistent() {
        let spec = GridSpec { n_points: 50, runs: 10, ..small(Task::Rotation, &[0.5]) };
        let report = run_convergence(&spec).unwrap();
        assert_eq!(report.runs.len(), 10);
        for run in &report.runs {
            let costs: Vec<f64> = report
                .traces
                .iter()
                .filter(|t| t.run == run.run && t.solver == SolverKind::Fracgm)
                .map(|t| t.gm_cost)
                .collect();
            assert_eq!(costs.len(), run.fracgm_iterations);
            assert!(costs.len() <= 30);
            assert_eq!(*costs.last().unwrap(), run.fracgm_final_cost);
            assert_eq!(iterations_to_within(&costs, 0.01), run.fracgm_iterations_to_1pct);
        }
    }

    #[test]
    fn noise_sweep_reuses_scenes() {
        let spec = GridSpec { runs: 3, solvers: vec![SolverKind::Svd], ..small(Task::Registration, &[0.5]) };
        let records = run_noise_sweep(&spec, &[0.01, 1.0]).unwrap();
        assert_eq!(records.len(), 6);
        // the closed form ignores a uniform bound, so both bounds give the same answer
        for pair in records.chunks(2) {
            assert_eq!(pair[0].seed, pair[1].seed);
            assert_eq!(pair[0].noise_bound, 0.01);
            assert_eq!(pair[1].noise_bound, 1.0);
            assert!((pair[0].rotation_error_deg.unwrap() - pair[1].rotation_error_deg.unwrap()).abs() < 1e-9);
        }
    }
}
