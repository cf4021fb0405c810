//! LP relaxations, branch-and-bound, and an exhaustive oracle.
//!
//! Feasibility tolerances are fixed: LP rows hold within [`LP_FEAS_TOL`] and
//! MILP incumbents within [`MILP_FEAS_TOL`], with binaries within the
//! configured integrality tolerance before they are rounded.

mod branch;
mod oracle;
mod simplex;

use std::time::Duration;

use thiserror::Error;

use crate::milp::LinearModel;

pub use branch::solve_milp;
pub use oracle::{brute_force_oracle, OracleOutcome, ORACLE_MAX_BINARIES};
pub use simplex::LpStatus;

pub const LP_FEAS_TOL: f64 = 1e-7;
pub const MILP_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    /// Objective of `values`; `+inf` unless the status is optimal.
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the LP relaxation of `model` (binary columns relaxed to their bounds).
pub fn solve_lp(model: &LinearModel) -> LpSolution {
    let mut lp = simplex::Simplex::new(model);
    let status = lp.solve();
    let objective = if status == LpStatus::Optimal {
        lp.objective()
    } else {
        f64::INFINITY
    };
    LpSolution {
        status,
        values: lp.values().to_vec(),
        objective,
        iterations: lp.iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    /// Search finished; the incumbent is optimal within the gap tolerance.
    Optimal,
    /// Stopped by a node or time limit with an incumbent in hand.
    Feasible,
    /// Proven infeasible.
    Infeasible,
    /// Stopped by a limit before any incumbent was found.
    Limit,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "optimal",
            MilpStatus::Feasible => "feasible",
            MilpStatus::Infeasible => "infeasible",
            MilpStatus::Limit => "limit",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, MilpStatus::Optimal | MilpStatus::Feasible)
    }
}

impl std::fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent column values, binaries rounded; empty without an incumbent.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    /// Lowest bound among unexplored nodes at termination.
    pub best_bound: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub integrality_tol: f64,
    pub relative_gap: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            integrality_tol: 1e-6,
            relative_gap: 1e-6,
            node_limit: None,
            time_limit: None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("tolerances must be positive")]
    BadTolerance,
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("simplex stalled (numerical failure)")]
    Stalled,
    #[error("model has {0} binary columns; the oracle enumerates at most {ORACLE_MAX_BINARIES}")]
    TooManyBinaries(usize),
}
