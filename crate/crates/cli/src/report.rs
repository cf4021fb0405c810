//! Side-by-side comparison reports for the two formulations.

use rayon::prelude::*;
use serde::Serialize;

use evsched_core::formulations::{build, EventPointConfig, Variant};
use evsched_core::generator::{generate_instance, GeneratorConfig};
use evsched_core::solver::{MilpSolution, MilpStatus, SolveConfig};

use crate::{solve_validated, CliError};

/// Objectives of two optimal runs are considered equal within this.
pub const OBJECTIVE_TOL: f64 = 1e-6;

/// Result of solving one formulation of one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    /// `optimal`, `feasible`, `infeasible`, `limit`, or `error`.
    pub status: String,
    pub objective: Option<f64>,
    pub seconds: f64,
    pub nodes: usize,
    pub error: Option<String>,
}

impl RunOutcome {
    pub fn from_solution(sol: &MilpSolution) -> Self {
        Self {
            status: sol.status.as_str().to_string(),
            objective: sol.objective,
            seconds: sol.elapsed.as_secs_f64(),
            nodes: sol.nodes,
            error: None,
        }
    }

    fn failed(err: CliError) -> Self {
        Self {
            status: "error".into(),
            objective: None,
            seconds: 0.0,
            nodes: 0,
            error: Some(err.to_string()),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == MilpStatus::Optimal.as_str()
    }

    /// Stopped by a limit while holding an incumbent.
    pub fn flagged(&self) -> bool {
        self.status == MilpStatus::Feasible.as_str()
    }

    /// Objective as printed in tables: incumbents at a limit carry a `*`.
    pub fn objective_text(&self) -> String {
        match self.objective {
            Some(c) if self.flagged() => format!("{c:.3}*"),
            Some(c) => format!("{c:.3}"),
            None => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub id: String,
    pub seed: u64,
    pub num_vars: usize,
    pub num_rows_general: usize,
    pub num_rows_triangle: usize,
    pub metric: bool,
    pub general: RunOutcome,
    pub triangle: RunOutcome,
}

impl BenchRow {
    /// Both optimal on a metric instance, yet different objectives.
    pub fn objective_mismatch(&self) -> bool {
        match (self.general.objective, self.triangle.objective) {
            (Some(a), Some(b))
                if self.metric && self.general.is_optimal() && self.triangle.is_optimal() =>
            {
                (a - b).abs() > OBJECTIVE_TOL
            }
            _ => false,
        }
    }

    fn ratio(&self) -> Option<f64> {
        (self.triangle.seconds > 0.0).then(|| self.general.seconds / self.triangle.seconds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub median_t: Option<f64>,
    pub median_t_tri: Option<f64>,
    /// Median over instances of `t / t_tri`.
    pub median_ratio: Option<f64>,
}

pub const CSV_HEADER: [&str; 10] = [
    "id",
    "var",
    "eqv",
    "eqv_tri",
    "c",
    "c_tri",
    "t",
    "t_tri",
    "status",
    "status_tri",
];

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    Some(if xs.len().is_multiple_of(2) {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    })
}

fn opt_text(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

impl BenchReport {
    pub fn from_rows(rows: Vec<BenchRow>) -> Self {
        let median_t = median(rows.iter().map(|r| r.general.seconds).collect());
        let median_t_tri = median(rows.iter().map(|r| r.triangle.seconds).collect());
        let median_ratio = median(rows.iter().filter_map(BenchRow::ratio).collect());
        Self {
            rows,
            median_t,
            median_t_tri,
            median_ratio,
        }
    }

    pub fn objective_mismatches(&self) -> Vec<&BenchRow> {
        self.rows
            .iter()
            .filter(|r| r.objective_mismatch())
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.id.clone(),
                r.num_vars.to_string(),
                r.num_rows_general.to_string(),
                r.num_rows_triangle.to_string(),
                r.general.objective_text(),
                r.triangle.objective_text(),
                format!("{:.3}", r.general.seconds),
                format!("{:.3}", r.triangle.seconds),
                r.general.status.clone(),
                r.triangle.status.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn summary_line(&self) -> String {
        format!(
            "instances={} median_t={} median_t_tri={} median_t/t_tri={}",
            self.rows.len(),
            opt_text(self.median_t),
            opt_text(self.median_t_tri),
            opt_text(self.median_ratio)
        )
    }
}

/// Generates, solves and validates each configured instance with both
/// formulations. Per-instance failures are recorded in the row, not raised.
pub fn bench_row(
    id: String,
    cfg: &GeneratorConfig,
    solve: &SolveConfig,
) -> Result<BenchRow, CliError> {
    let inst = generate_instance(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    let points =
        EventPointConfig::new(cfg.event_points).map_err(|e| CliError::Usage(e.to_string()))?;
    let general_stats = build(&inst, points, Variant::General).model.stats();
    let triangle_stats = build(&inst, points, Variant::Triangle).model.stats();
    let outcome = |variant| match solve_validated(&inst, points, variant, solve) {
        Ok((sol, _)) => RunOutcome::from_solution(&sol),
        Err(e) => RunOutcome::failed(e),
    };
    Ok(BenchRow {
        id,
        seed: cfg.seed,
        num_vars: general_stats.num_vars,
        num_rows_general: general_stats.num_rows,
        num_rows_triangle: triangle_stats.num_rows,
        metric: inst.satisfies_triangle(),
        general: outcome(Variant::General),
        triangle: outcome(Variant::Triangle),
    })
}

pub fn run_series(
    prefix: &str,
    configs: &[GeneratorConfig],
    solve: &SolveConfig,
    sequential: bool,
) -> Result<BenchReport, CliError> {
    let job = |(idx, cfg): (usize, &GeneratorConfig)| {
        bench_row(format!("{prefix}-{:02}", idx + 1), cfg, solve)
    };
    let rows: Result<Vec<_>, _> = if sequential {
        configs.iter().enumerate().map(job).collect()
    } else {
        configs.par_iter().enumerate().map(job).collect()
    };
    Ok(BenchReport::from_rows(rows?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(status: &str, objective: Option<f64>, seconds: f64) -> RunOutcome {
        RunOutcome {
            status: status.into(),
            objective,
            seconds,
            nodes: 0,
            error: None,
        }
    }

    fn row(general: RunOutcome, triangle: RunOutcome) -> BenchRow {
        BenchRow {
            id: "S1-01".into(),
            seed: 0,
            num_vars: 10,
            num_rows_general: 12,
            num_rows_triangle: 11,
            metric: true,
            general,
            triangle,
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(vec![]), None);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn limit_incumbent_is_starred() {
        let r = row(
            outcome("feasible", Some(48.996), 2.0),
            outcome("optimal", Some(48.0), 1.0),
        );
        let csv = BenchReport::from_rows(vec![r]).to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "id,var,eqv,eqv_tri,c,c_tri,t,t_tri,status,status_tri"
        );
        assert_eq!(
            lines.next().unwrap(),
            "S1-01,10,12,11,48.996*,48.000,2.000,1.000,feasible,optimal"
        );
    }

    #[test]
    fn mismatch_only_between_optimal_runs_on_metric_instances() {
        let both = row(
            outcome("optimal", Some(5.0), 1.0),
            outcome("optimal", Some(6.0), 1.0),
        );
        assert!(both.objective_mismatch());
        let non_metric = BenchRow {
            metric: false,
            ..both.clone()
        };
        assert!(!non_metric.objective_mismatch());
        let limited = row(
            outcome("feasible", Some(5.0), 1.0),
            outcome("optimal", Some(6.0), 1.0),
        );
        assert!(!limited.objective_mismatch());
    }

    #[test]
    fn ratio_median() {
        let report = BenchReport::from_rows(vec![
            row(
                outcome("optimal", Some(1.0), 2.0),
                outcome("optimal", Some(1.0), 1.0),
            ),
            row(
                outcome("optimal", Some(1.0), 3.0),
                outcome("optimal", Some(1.0), 1.0),
            ),
            row(
                outcome("optimal", Some(1.0), 9.0),
                outcome("optimal", Some(1.0), 1.0),
            ),
        ]);
        assert_eq!(report.median_ratio, Some(3.0));
        assert_eq!(report.median_t, Some(3.0));
    }

    #[test]
    fn empty_report() {
        let report = BenchReport::from_rows(Vec::new());
        assert_eq!(report.to_csv().unwrap().lines().count(), 1);
        assert_eq!(report.median_ratio, None);
    }
}
