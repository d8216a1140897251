//! Summary statistics, performance profiles and file output.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::harness::RunRecord;
use crate::solvers::SolverKind;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Linearly interpolated quantile, `q ∈ [0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub solver: SolverKind,
    pub outlier_rate: f64,
    pub noise_bound: f64,
    pub metric: &'static str,
    pub count: usize,
    pub failures: usize,
    pub mean: f64,
    pub median: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

type GroupKey = (SolverKind, u64, u64);

fn key(r: &RunRecord) -> GroupKey {
    (r.solver, r.outlier_rate.to_bits(), r.noise_bound.to_bits())
}

/// Groups records by `(solver, outlier_rate, noise_bound)` in first-seen order.
pub fn group(records: &[RunRecord]) -> Vec<Vec<&RunRecord>> {
    let mut keys: Vec<GroupKey> = Vec::new();
    let mut groups: Vec<Vec<&RunRecord>> = Vec::new();
    for r in records {
        let k = key(r);
        match keys.iter().position(|&x| x == k) {
            Some(i) => groups[i].push(r),
            None => {
                keys.push(k);
                groups.push(vec![r]);
            }
        }
    }
    groups
}

fn summary_row(
    rows: &[&RunRecord],
    metric: &'static str,
    values: &[f64],
) -> SummaryRow {
    let first = rows[0];
    SummaryRow {
        scenario: first.scenario.clone(),
        solver: first.solver,
        outlier_rate: first.outlier_rate,
        noise_bound: first.noise_bound,
        metric,
        count: rows.len(),
        failures: rows.len() - values.len(),
        mean: mean(values),
        median: quantile(values, 0.5),
        p25: quantile(values, 0.25),
        p50: quantile(values, 0.5),
        p75: quantile(values, 0.75),
        p95: quantile(values, 0.95),
    }
}

/// Error statistics per group. Failed runs are counted but excluded from the
/// statistics.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for rows in group(records) {
        let rot: Vec<f64> = rows.iter().filter_map(|r| r.rotation_error_deg).collect();
        out.push(summary_row(&rows, "rotation_error_deg", &rot));
        let trans: Vec<f64> = rows.iter().filter_map(|r| r.translation_error_m).collect();
        if !trans.is_empty() {
            out.push(summary_row(&rows, "translation_error_m", &trans));
        }
    }
    out
}

pub const PROFILE_THRESHOLDS_DEG: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub solver: SolverKind,
    pub outlier_rate: f64,
    pub noise_bound: f64,
    pub threshold_deg: f64,
    /// Fraction of runs, failures included, below the threshold.
    pub fraction: f64,
}

/// Fraction of runs whose rotation error is under `threshold_deg`.
pub fn fraction_within(rows: &[&RunRecord], threshold_deg: f64) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let hits = rows
        .iter()
        .filter(|r| r.rotation_error_deg.is_some_and(|e| e < threshold_deg))
        .count();
    hits as f64 / rows.len() as f64
}

pub fn performance_profile(records: &[RunRecord]) -> Vec<ProfileRow> {
    let mut out = Vec::new();
    for rows in group(records) {
        for &threshold_deg in &PROFILE_THRESHOLDS_DEG {
            out.push(ProfileRow {
                solver: rows[0].solver,
                outlier_rate: rows[0].outlier_rate,
                noise_bound: rows[0].noise_bound,
                threshold_deg,
                fraction: fraction_within(&rows, threshold_deg),
            });
        }
    }
    out
}

pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row).map_err(io::Error::other)?;
    }
    w.flush()
}

/// Writes pretty-printed JSON.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert_eq!(quantile(&xs, 0.5), 2.5);
        assert!((quantile(&xs, 0.25) - 1.75).abs() < 1e-15);
        assert!(quantile(&[], 0.5).is_nan());
        assert_eq!(mean(&xs), 2.5);
    }
}
