mod common;

use common::*;
use fracgm::{
    fracgm_solve, gm_cost, psi_norm, solve_weighted_quadratic, update_auxiliary, Aux, Config,
    Error, Problem,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64) -> (Problem, DVector<f64>) {
    let mut rng = rng(seed);
    let d = [4usize, 6, 10, 13][rng.random_range(0..4)];
    let n = rng.random_range(d..4 * d);
    let c = rng.random_range(0.3..3.0);
    (random_problem(&mut rng, d, n, c), random_homogenized(&mut rng, d))
}

/// Independent evaluation of `Σ μ_i (f_i − β_i h_i)` and `Σ μ_i f_i`.
fn dual_objective(problem: &Problem, aux: &Aux, x: &DVector<f64>) -> (f64, f64) {
    let c2 = problem.c() * problem.c();
    let mut total = 0.0;
    let mut scale = 0.0;
    for (i, term) in problem.terms().iter().enumerate() {
        let s = x.dot(&(term.matrix() * x));
        let (f, h) = (c2 * s, s + c2);
        total += aux.mu[i] * (f - aux.beta[i] * h);
        scale += aux.mu[i] * f;
    }
    (total, scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn auxiliary_update_is_a_psi_root(seed in any::<u64>()) {
        let (problem, x) = instance(seed);
        let aux = update_auxiliary(&problem, &x).unwrap();
        prop_assert!(psi_norm(&problem, &aux, &x).unwrap() <= 1e-12);
        prop_assert_eq!(aux.violations(problem.c_squared()), 0);
    }

    #[test]
    fn dual_objective_vanishes_at_updated_aux(seed in any::<u64>()) {
        let (problem, x) = instance(seed);
        let aux = update_auxiliary(&problem, &x).unwrap();
        let (total, scale) = dual_objective(&problem, &aux, &x);
        prop_assert!(total.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE), "{total} vs {scale}");
    }

    #[test]
    fn quadratic_solve_ignores_uniform_scaling(seed in any::<u64>(), kappa in 1e-3f64..1e3) {
        let (problem, x) = instance(seed);
        let aux = update_auxiliary(&problem, &x).unwrap();
        let scaled_mu = Aux::new(aux.beta.clone(), aux.mu.iter().map(|m| m * kappa).collect()).unwrap();
        let a = solve_weighted_quadratic(&problem, &aux).unwrap();
        let b = solve_weighted_quadratic(&problem, &scaled_mu).unwrap();
        prop_assert!(rel_diff(&b, &a) <= 1e-9);
    }

    #[test]
    fn joint_scaling_leaves_iterates_unchanged(seed in any::<u64>(), kappa in 1e-2f64..1e2) {
        let (problem, x0) = instance(seed);
        let scaled = Problem::new(
            problem.terms().iter().map(|t| t.scaled(kappa)).collect(),
            problem.c() * kappa.sqrt(),
        ).unwrap();
        // the stopping test is not scale-free, so compare fixed iteration counts
        for k in [1usize, 3, 8] {
            let cfg = Config { max_iterations: k, tolerance: 1e-300, ..Config::default() };
            let a = fracgm_solve(&problem, &x0, &cfg).unwrap();
            let b = fracgm_solve(&scaled, &x0, &cfg).unwrap();
            prop_assert!(rel_diff(&b.x, &a.x) <= 1e-9, "k={k}: {:e}", rel_diff(&b.x, &a.x));
            prop_assert!((b.final_cost - kappa * a.final_cost).abs() <= 1e-9 * kappa * a.final_cost.max(1e-12));
        }
    }
}

#[test]
fn cost_descends_on_most_instances() {
    let runs = 200;
    let mut descended = 0;
    for seed in 0..runs {
        let (problem, x0) = instance(1000 + seed);
        let sol = fracgm_solve(&problem, &x0, &Config::default()).unwrap();
        if sol.final_cost <= gm_cost(&problem, &x0).unwrap() * (1.0 + 1e-12) {
            descended += 1;
        }
        assert_eq!(sol.diagnostics.aux_violations, 0);
        assert_eq!(sol.x[problem.homog_index()], 1.0);
        let n = problem.len() as f64;
        assert!(sol.final_cost >= 0.0 && sol.final_cost < n * problem.c_squared());
    }
    assert!(descended as f64 >= 0.95 * runs as f64, "{descended}/{runs}");
}

#[test]
fn trace_ends_at_reported_cost() {
    let (problem, x0) = instance(7);
    let cfg = Config { record_trace: true, check_spectrum: true, ..Config::default() };
    let sol = fracgm_solve(&problem, &x0, &cfg).unwrap();
    let trace = sol.trace.as_ref().unwrap();
    assert_eq!(trace.len(), sol.iterations);
    let recomputed = gm_cost(&problem, &sol.x).unwrap();
    assert!((trace.last().unwrap().cost - recomputed).abs() <= 1e-12 * recomputed);
    assert_eq!(sol.final_cost, trace.last().unwrap().cost);
    assert_eq!(sol.diagnostics.spectrum_violations, 0);
    assert!(sol.diagnostics.min_spectrum_ratio.unwrap() >= -1e-9);
    if sol.converged {
        assert!(sol.final_psi_norm <= cfg.tolerance);
    }
}

#[test]
fn stops_at_the_iteration_cap() {
    let (problem, x0) = instance(8);
    let cfg = Config { max_iterations: 1, tolerance: 1e-300, ..Config::default() };
    let sol = fracgm_solve(&problem, &x0, &cfg).unwrap();
    assert_eq!(sol.iterations, 1);
    assert!(!sol.converged);
}

#[test]
fn rejects_non_homogenized_start() {
    let (problem, mut x0) = instance(9);
    x0[problem.homog_index()] = 2.0;
    assert!(matches!(
        fracgm_solve(&problem, &x0, &Config::default()),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn single_precision_tracks_double() {
    let (problem, x0) = instance(10);
    let terms = problem
        .terms()
        .iter()
        .map(|t| fracgm::QuadraticTerm::new(t.matrix().map(|v| v as f32)))
        .collect::<Result<Vec<_>, _>>()
        .unwrap();
    let problem32 = fracgm::Problem32::new(terms, problem.c() as f32).unwrap();
    let x0_32 = x0.map(|v| v as f32);
    let cfg = Config { max_iterations: 5, ..Config::default() };
    let cfg32 = fracgm::Config32 { max_iterations: 5, tolerance: 1e-5, ..fracgm::Config32::default() };
    let a = fracgm_solve(&problem, &x0, &cfg).unwrap();
    let b = fracgm_solve(&problem32, &x0_32, &cfg32).unwrap();
    let b64 = b.x.map(f64::from);
    assert!(rel_diff(&b64, &a.x) < 1e-3, "{:e}", rel_diff(&b64, &a.x));
}
