//! Multiproduct scheduling with multi-machine technologies and
//! sequence-dependent setups, modelled as continuous-time event-point MILPs.
//!
//! The crate covers the whole pipeline: instance data and generation
//! ([`instance`], [`generator`]), a solver-independent model representation
//! with LP text export ([`milp`]), the two formulations ([`formulations`]),
//! an exact branch-and-bound solver with a brute-force oracle ([`solver`]),
//! and schedule decoding and validation ([`schedule`]).

pub mod formulations;
pub mod generator;
pub mod instance;
pub mod milp;
pub mod schedule;
pub mod solver;

pub use formulations::{
    build, build_general, build_triangle, predict_stats, BuiltModel, EventPointConfig, Variant,
};
pub use generator::{generate_instance, GeneratorConfig, Series, SeriesPreset, TriangleMode};
pub use instance::{Instance, Product, Technology};
pub use milp::{LinearModel, ModelStats};
pub use schedule::{
    decode, decode_values, validate, DecodeError, Run, Schedule, ValidationReport, Violation,
};
pub use solver::{
    brute_force_oracle, solve_lp, solve_milp, MilpSolution, MilpStatus, OracleOutcome, SolveConfig,
    ORACLE_MAX_BINARIES,
};
