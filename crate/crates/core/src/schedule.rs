//! Decoding solutions into technology runs and checking them against the
//! scheduling rules directly, without looking at any model rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulations::BuiltModel;
use crate::instance::Instance;
use crate::solver::MilpSolution;

/// Absolute tolerance for every validation check.
pub const VALIDATION_TOL: f64 = 1e-6;
const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub technology: usize,
    pub event_point: usize,
    pub start: f64,
    pub finish: f64,
}

impl Run {
    pub fn length(&self) -> f64 {
        self.finish - self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub runs: Vec<Run>,
    pub makespan: f64,
    /// Produced volume per product.
    pub produced: Vec<f64>,
}

impl Schedule {
    /// Builds a schedule from runs, deriving makespan and produced volumes.
    pub fn from_runs(inst: &Instance, runs: Vec<Run>) -> Self {
        let mut produced = vec![0.0; inst.num_products()];
        for r in &runs {
            let tech = &inst.technologies()[r.technology];
            produced[tech.product] += tech.rate * r.length();
        }
        let makespan = runs.iter().map(|r| r.finish).fold(0.0, f64::max);
        Self {
            runs,
            makespan,
            produced,
        }
    }

    pub fn makespan(&self) -> f64 {
        self.makespan
    }

    pub fn to_json(&self) -> String {
        let file = ScheduleFile {
            runs: self
                .runs
                .iter()
                .map(|r| RunEntry {
                    technology: r.technology + 1,
                    event_point: r.event_point + 1,
                    start: r.start,
                    finish: r.finish,
                })
                .collect(),
            makespan: self.makespan,
            produced: self
                .produced
                .iter()
                .enumerate()
                .map(|(i, &volume)| ProducedEntry {
                    product: i + 1,
                    volume,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("schedule serialises")
    }
}

/// Schedule JSON layout (one-based ids).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub runs: Vec<RunEntry>,
    pub makespan: f64,
    pub produced: Vec<ProducedEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub technology: usize,
    pub event_point: usize,
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProducedEntry {
    pub product: usize,
    pub volume: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("solution has no values (status {0})")]
    NoSolution(String),
    #[error("solution has {got} values, model has {expected} columns")]
    WrongLength { got: usize, expected: usize },
    #[error(
        "active run of technology {technology} at event point {event_point} starts at {start}"
    )]
    NegativeStart {
        technology: usize,
        event_point: usize,
        start: f64,
    },
}

fn clean(t: f64) -> f64 {
    if t.abs() < ZERO_TOL {
        0.0
    } else {
        t
    }
}

/// One run per active `(u, n)` with positive length. Inactive grid points,
/// including the negative placeholders of the triangle model, are skipped.
pub fn decode(built: &BuiltModel, sol: &MilpSolution) -> Result<Schedule, DecodeError> {
    if !sol.status.has_solution() {
        return Err(DecodeError::NoSolution(sol.status.to_string()));
    }
    decode_values(built, &sol.values)
}

pub fn decode_values(built: &BuiltModel, values: &[f64]) -> Result<Schedule, DecodeError> {
    let expected = built.model.columns().len();
    if values.len() != expected {
        return Err(DecodeError::WrongLength {
            got: values.len(),
            expected,
        });
    }
    let v = &built.vars;
    let mut runs = Vec::new();
    for n in 0..v.points() {
        for u in 0..v.techs() {
            if values[v.w(u, n).0] < 0.5 {
                continue;
            }
            let start = clean(values[v.start(u, n).0]);
            let finish = clean(values[v.finish(u, n).0]);
            if finish - start <= ZERO_TOL {
                continue;
            }
            if start < -VALIDATION_TOL {
                return Err(DecodeError::NegativeStart {
                    technology: u,
                    event_point: n,
                    start,
                });
            }
            runs.push(Run {
                technology: u,
                event_point: n,
                start: start.max(0.0),
                finish,
            });
        }
    }
    Ok(Schedule::from_runs(&built.instance, runs))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Two runs occupy a shared machine at the same time.
    Overlap {
        machine: usize,
        first: Run,
        second: Run,
        amount: f64,
    },
    /// Consecutive runs on a machine are closer than the required setup.
    SetupGap {
        machine: usize,
        first: Run,
        second: Run,
        required: f64,
        available: f64,
    },
    VolumeShortfall {
        product: usize,
        required: f64,
        produced: f64,
    },
    NegativeTime {
        run: Run,
    },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Overlap { .. } => "overlap",
            Violation::SetupGap { .. } => "setup_gap",
            Violation::VolumeShortfall { .. } => "volume_shortfall",
            Violation::NegativeTime { .. } => "negative_time",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.violations.iter().filter(|v| v.kind() == kind).count()
    }
}

/// Checks machine exclusivity, setups between consecutive runs on each
/// machine, produced volumes, and non-negative times.
pub fn validate(inst: &Instance, sched: &Schedule) -> ValidationReport {
    let mut violations = Vec::new();
    for run in &sched.runs {
        if run.start < -VALIDATION_TOL || run.finish < run.start - VALIDATION_TOL {
            violations.push(Violation::NegativeTime { run: *run });
        }
    }

    for l in 0..inst.num_machines() {
        let mut on: Vec<Run> = sched
            .runs
            .iter()
            .filter(|r| inst.technologies()[r.technology].machines.contains(&l))
            .copied()
            .collect();
        on.sort_by(|a, b| {
            a.start
                .total_cmp(&b.start)
                .then(a.finish.total_cmp(&b.finish))
        });

        for (i, a) in on.iter().enumerate() {
            for b in &on[i + 1..] {
                let amount = a.finish.min(b.finish) - b.start;
                if amount > VALIDATION_TOL {
                    violations.push(Violation::Overlap {
                        machine: l,
                        first: *a,
                        second: *b,
                        amount,
                    });
                }
            }
        }
        for pair in on.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.finish - b.start > VALIDATION_TOL {
                continue; // reported as overlap
            }
            let required = if a.technology == b.technology {
                0.0
            } else {
                inst.setup(l, a.technology, b.technology)
            };
            let available = b.start - a.finish;
            if available < required - VALIDATION_TOL {
                violations.push(Violation::SetupGap {
                    machine: l,
                    first: a,
                    second: b,
                    required,
                    available,
                });
            }
        }
    }

    for (i, p) in inst.products().iter().enumerate() {
        let produced = sched.produced.get(i).copied().unwrap_or(0.0);
        if produced < p.volume - VALIDATION_TOL {
            violations.push(Violation::VolumeShortfall {
                product: i,
                required: p.volume,
                produced,
            });
        }
    }
    ValidationReport { violations }
}
