use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracgm::synthetic::PointSource;
use fracgm_bench::report::{write_csv, write_json};
use fracgm_bench::{
    fit_loglog_exponent, parse_solver_list, performance_profile, run_convergence, run_grid,
    run_noise_sweep, run_timing, summarize, GridSpec, SolverKind, SolverSettings, Task,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fracgm-bench", version, about = "Synthetic robust-estimation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rotation error over an outlier-rate grid.
    Rotation(Common),
    /// Rotation and translation error over an outlier-rate grid.
    Registration(Common),
    /// Per-iteration GM cost of FracGM and GNC-GM.
    Convergence(Common),
    /// Same scenes solved under several noise bounds.
    NoiseSweep(Common),
    /// Mean FracGM registration solve time against N (single thread).
    Timing(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Comma-separated outlier rates in [0, 1).
    #[arg(long, value_delimiter = ',')]
    outlier_rates: Option<Vec<f64>>,
    /// Number of correspondences; a comma-separated grid for `timing`.
    #[arg(long, value_delimiter = ',')]
    n_points: Option<Vec<usize>>,
    #[arg(long, default_value_t = 40)]
    runs: usize,
    /// Seed of run 0; run k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise bound(s); a comma-separated grid for `noise-sweep`.
    #[arg(long, value_delimiter = ',')]
    noise_bound: Option<Vec<f64>>,
    /// Standard deviation of the inlier noise.
    #[arg(long, default_value_t = 0.01)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Comma-separated subset of fracgm,gnc-gm,gnc-tls,svd.
    #[arg(long, default_value = "fracgm,gnc-gm,gnc-tls,svd")]
    solvers: String,
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// ASCII PLY cloud used instead of random cube points.
    #[arg(long)]
    bunny: Option<PathBuf>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    scenario: &'a str,
    version: &'a str,
    outlier_rates: &'a [f64],
    n_points: &'a [usize],
    runs: usize,
    seed: u64,
    seed_rule: &'a str,
    noise_sigma: f64,
    noise_bounds: &'a [f64],
    c: f64,
    solvers: Vec<&'a str>,
    point_source: String,
    outlier_model: &'a str,
    notes: &'a str,
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn run(command: Command) -> Result<(), Failure> {
    let (scenario, args) = match &command {
        Command::Rotation(a) => ("rotation", a),
        Command::Registration(a) => ("registration", a),
        Command::Convergence(a) => ("convergence", a),
        Command::NoiseSweep(a) => ("noise-sweep", a),
        Command::Timing(a) => ("timing", a),
    };
    let task = match scenario {
        "rotation" | "convergence" => Task::Rotation,
        _ => Task::Registration,
    };
    let default_rates: &[f64] = match scenario {
        "rotation" => &[0.2, 0.4, 0.6, 0.8],
        "registration" => &[0.2, 0.5, 0.8],
        _ => &[0.5],
    };
    let default_sizes: &[usize] = match scenario {
        "rotation" | "convergence" => &[50],
        "timing" => &[100, 500, 1000, 2000, 5000],
        _ => &[500],
    };
    let default_bounds: &[f64] = match scenario {
        "noise-sweep" => &[0.01, 0.1, 1.0],
        _ => &[0.1],
    };
    let rates = args.outlier_rates.clone().unwrap_or_else(|| default_rates.to_vec());
    let sizes = args.n_points.clone().unwrap_or_else(|| default_sizes.to_vec());
    let bounds = args.noise_bound.clone().unwrap_or_else(|| default_bounds.to_vec());
    let solvers = parse_solver_list(&args.solvers).map_err(Failure::Config)?;
    if sizes.is_empty() || bounds.is_empty() {
        return Err(Failure::Config("empty --n-points or --noise-bound".into()));
    }
    if scenario != "timing" && sizes.len() != 1 {
        return Err(Failure::Config(format!("{scenario} takes a single --n-points value")));
    }
    if scenario != "noise-sweep" && bounds.len() != 1 {
        return Err(Failure::Config(format!("{scenario} takes a single --noise-bound value")));
    }
    if bounds.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
        return Err(Failure::Config("noise bounds must be positive".into()));
    }
    let source = match &args.bunny {
        Some(p) => PointSource::PlyFile(p.clone()),
        None => PointSource::RandomCube,
    };

    let spec = GridSpec {
        task,
        outlier_rates: rates.clone(),
        n_points: sizes[0],
        runs: args.runs,
        base_seed: args.seed,
        noise_sigma: args.noise_sigma,
        noise_bound: bounds[0],
        source: source.clone(),
        solvers: solvers.clone(),
        settings: SolverSettings {
            c: args.c,
            ..SolverSettings::default()
        },
    };
    spec.validate().map_err(Failure::Config)?;
    if let PointSource::PlyFile(p) = &source {
        if !p.is_file() {
            return Err(Failure::Config(format!("{}: no such file", p.display())));
        }
    }

    let out = &args.out;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = |name: &str| out.join(name);
    let run_err = |e: fracgm::Error| Failure::Runtime(e.to_string());

    match scenario {
        "rotation" | "registration" | "noise-sweep" => {
            let records = if scenario == "noise-sweep" {
                run_noise_sweep(&spec, &bounds).map_err(run_err)?
            } else {
                run_grid(&spec).map_err(run_err)?
            };
            let p = path("runs.csv");
            write_csv(&p, &records).map_err(io_err(&p))?;
            let summary = summarize(&records);
            let p = path("summary.csv");
            write_csv(&p, &summary).map_err(io_err(&p))?;
            let p = path("profile.csv");
            write_csv(&p, &performance_profile(&records)).map_err(io_err(&p))?;
            for row in summary.iter().filter(|r| r.metric == "rotation_error_deg") {
                println!(
                    "{:<8} rate={:.2} bound={:<5} mean={:.4}° median={:.4}° failures={}",
                    row.solver.name(),
                    row.outlier_rate,
                    row.noise_bound,
                    row.mean,
                    row.median,
                    row.failures
                );
            }
        }
        "convergence" => {
            let report = run_convergence(&spec).map_err(run_err)?;
            let p = path("trace.csv");
            write_csv(&p, &report.traces).map_err(io_err(&p))?;
            let p = path("convergence.csv");
            write_csv(&p, &report.runs).map_err(io_err(&p))?;
            let faster = report
                .runs
                .iter()
                .filter(|r| r.fracgm_iterations_to_1pct < r.gnc_gm_iterations_to_1pct)
                .count();
            println!(
                "fracgm reached 1% of its final cost before gnc-gm in {faster}/{} runs",
                report.runs.len()
            );
        }
        _ => {
            let timing_spec = GridSpec {
                runs: args.runs,
                ..spec.clone()
            };
            let rows = run_timing(&timing_spec, &sizes).map_err(run_err)?;
            let p = path("timing.csv");
            write_csv(&p, &rows).map_err(io_err(&p))?;
            for r in &rows {
                println!("N={:<6} mean={:.6}s median={:.6}s", r.n_points, r.mean_time_s, r.median_time_s);
            }
            if rows.len() >= 2 {
                println!("log-log exponent {:.3}", fit_loglog_exponent(&rows));
            }
        }
    }

    let meta = Metadata {
        scenario,
        version: env!("CARGO_PKG_VERSION"),
        outlier_rates: &rates,
        n_points: &sizes,
        runs: args.runs,
        seed: args.seed,
        seed_rule: "run k uses seed + k; the same seed is reused across outlier rates and noise bounds",
        noise_sigma: args.noise_sigma,
        noise_bounds: &bounds,
        c: args.c,
        solvers: match scenario {
            "convergence" => vec![SolverKind::Fracgm.name(), SolverKind::GncGm.name()],
            "timing" => vec![SolverKind::Fracgm.name()],
            _ => solvers.iter().map(|s| s.name()).collect(),
        },
        point_source: match &source {
            PointSource::RandomCube => "random-cube [-0.5, 0.5]^3".into(),
            PointSource::PlyFile(p) => p.display().to_string(),
        },
        outlier_model: "target replaced by a uniform sample of the origin-centered ball of radius 2",
        notes: "TEASER++, RANSAC and FGR are not reproduced; only the solvers listed are compared",
    };
    let p = path("metadata.json");
    write_json(&p, &meta).map_err(io_err(&p))?;
    Ok(())
}
