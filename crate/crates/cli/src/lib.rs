//! Command implementations behind the `evsched` binary.
//!
//! Every command writes its human-readable output to a caller-supplied writer
//! so the integration tests can drive them without spawning processes.

pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use evsched_core::formulations::{build, predict_stats, EventPointConfig, Variant};
use evsched_core::generator::{generate_instance, GeneratorConfig, Series, TriangleMode};
use evsched_core::instance::Instance;
use evsched_core::milp::write_lp;
use evsched_core::schedule::{decode, validate, Schedule};
use evsched_core::solver::{solve_milp, MilpSolution, SolveConfig};

pub use report::{BenchReport, BenchRow, RunOutcome};

/// Event points used when `--nmax` is not given for a stored instance.
pub const DEFAULT_EVENT_POINTS: usize = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::io("writing output")(e)
}

#[derive(Debug, Parser)]
#[command(
    name = "evsched",
    version,
    about = "Event-point MILP scheduling with sequence-dependent setups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate random instances as JSON files.
    Gen(GenArgs),
    /// Build a formulation and write it as LP text.
    Build(BuildArgs),
    /// Solve one formulation, validate the schedule, and report.
    Solve(SolveArgs),
    /// Run both formulations over a generated series and report in table form.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct InstanceShape {
    /// Series preset (S1, S2, S3); explicit size flags override its fields.
    #[arg(long)]
    pub series: Option<Series>,
    /// Use the full-size series parameters instead of the shrunk defaults.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub umax: Option<usize>,
    #[arg(long)]
    pub vmax: Option<f64>,
    #[arg(long)]
    pub smax: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Number of instances (defaults to the series size, or 1).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep raw random setups instead of their shortest-path closure.
    #[arg(long)]
    pub raw: bool,
}

impl InstanceShape {
    /// Resolves the flags into one generator config per instance, plus a file
    /// name prefix.
    pub fn configs(&self) -> Result<(String, Vec<GeneratorConfig>), CliError> {
        let triangle = if self.raw {
            TriangleMode::Raw
        } else {
            TriangleMode::MetricClosure
        };
        let (prefix, mut preset) = match self.series {
            Some(s) => (
                s.name().to_string(),
                if self.full { s.full() } else { s.desk() },
            ),
            None => {
                let missing: Vec<&str> = [("--k", self.k.is_none()), ("--m", self.m.is_none())]
                    .iter()
                    .filter(|(_, m)| *m)
                    .map(|(f, _)| *f)
                    .collect();
                if !missing.is_empty() {
                    return Err(CliError::Usage(format!(
                        "either --series or {} is required",
                        missing.join(" and ")
                    )));
                }
                let mut p = Series::S1.desk();
                p.count = 1;
                p.max_techs = 1;
                ("custom".to_string(), p)
            }
        };
        preset.products = self.k.unwrap_or(preset.products);
        preset.machines = self.m.unwrap_or(preset.machines);
        preset.max_techs = self.umax.unwrap_or(preset.max_techs);
        preset.max_volume = self.vmax.unwrap_or(preset.max_volume);
        preset.max_setup = self.smax.unwrap_or(preset.max_setup);
        preset.event_points = self.nmax.unwrap_or(preset.event_points);
        preset.count = self.count.unwrap_or(preset.count);
        let configs = preset.configs(self.seed, triangle);
        for cfg in &configs {
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok((prefix, configs))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub shape: InstanceShape,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Instance JSON file.
    pub instance: PathBuf,
    #[arg(long, default_value = "general")]
    pub variant: Variant,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// LP text output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct Limits {
    /// Wall-clock limit per solve, in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Maximum branch-and-bound nodes per solve.
    #[arg(long)]
    pub node_limit: Option<usize>,
}

impl Limits {
    pub fn solve_config(&self) -> Result<SolveConfig, CliError> {
        let time_limit = match self.time_limit {
            Some(t) if !(t.is_finite() && t >= 0.0) => {
                return Err(CliError::Usage(format!("invalid --time-limit {t}")))
            }
            Some(t) => Some(Duration::from_secs_f64(t)),
            None => None,
        };
        Ok(SolveConfig {
            time_limit,
            node_limit: self.node_limit,
            ..SolveConfig::default()
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "general")]
    pub variant: Variant,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[command(flatten)]
    pub limits: Limits,
    /// Schedule JSON output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub shape: InstanceShape,
    #[command(flatten)]
    pub limits: Limits,
    /// Solve instances one after another on the calling thread.
    #[arg(long)]
    pub sequential: bool,
    /// CSV report path (stdout when omitted). A JSON report with aggregates
    /// is written next to it with a `.json` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&args, out).map(|_| ()),
        Command::Build(args) => cmd_build(&args, out),
        Command::Solve(args) => cmd_solve(&args, out).map(|_| ()),
        Command::Bench(args) => cmd_bench(&args, out).map(|_| ()),
    }
}

pub fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text =
        fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    Instance::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn event_points(nmax: Option<usize>) -> Result<EventPointConfig, CliError> {
    EventPointConfig::new(nmax.unwrap_or(DEFAULT_EVENT_POINTS))
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let (prefix, configs) = args.shape.configs()?;
    fs::create_dir_all(&args.out)
        .map_err(CliError::io(format!("creating {}", args.out.display())))?;
    let mut written = Vec::with_capacity(configs.len());
    for (idx, cfg) in configs.iter().enumerate() {
        let inst = generate_instance(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
        let path = args.out.join(format!("{prefix}-{:02}.json", idx + 1));
        fs::write(&path, inst.to_json() + "\n")
            .map_err(CliError::io(format!("writing {}", path.display())))?;
        writeln!(
            out,
            "{} seed={} d={} sum|K|={} sum|K|^2={}",
            path.display(),
            cfg.seed,
            inst.num_technologies(),
            inst.incidence_count(),
            inst.incidence_square_sum()
        )
        .map_err(out_err)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = read_instance(&args.instance)?;
    let cfg = event_points(args.nmax)?;
    let built = build(&inst, cfg, args.variant);
    if built.triangle_warning {
        writeln!(out, "warning: setups violate the triangle inequality; the triangle model may miss the optimum")
            .map_err(out_err)?;
    }
    let predicted = predict_stats(&inst, cfg, args.variant);
    let actual = built.model.stats();
    writeln!(
        out,
        "{} n_max={} predicted vars={} rows={} actual vars={} rows={}",
        args.variant,
        cfg.points(),
        predicted.num_vars,
        predicted.num_rows,
        actual.num_vars,
        actual.num_rows
    )
    .map_err(out_err)?;
    if predicted != actual {
        return Err(CliError::Internal(format!(
            "size prediction {predicted:?} != built {actual:?}"
        )));
    }
    fs::write(&args.out, write_lp(&built.model))
        .map_err(CliError::io(format!("writing {}", args.out.display())))
}

/// Solve, decode and validate one formulation. A reported objective always
/// has a validated schedule behind it.
pub fn solve_validated(
    inst: &Instance,
    cfg: EventPointConfig,
    variant: Variant,
    solve: &SolveConfig,
) -> Result<(MilpSolution, Option<Schedule>), CliError> {
    let built = build(inst, cfg, variant);
    let sol = solve_milp(&built.model, solve)
        .map_err(|e| CliError::Internal(format!("{variant}: {e}")))?;
    if !sol.status.has_solution() {
        return Ok((sol, None));
    }
    let sched = decode(&built, &sol).map_err(|e| CliError::Internal(format!("{variant}: {e}")))?;
    let report = validate(inst, &sched);
    if !report.ok() {
        return Err(CliError::Internal(format!(
            "{variant} solution fails validation: {:?}",
            report.violations
        )));
    }
    let objective = sol.objective.unwrap_or(f64::NAN);
    if (sched.makespan() - objective).abs() > evsched_core::schedule::VALIDATION_TOL {
        return Err(CliError::Internal(format!(
            "{variant}: decoded makespan {} differs from objective {objective}",
            sched.makespan()
        )));
    }
    Ok((sol, Some(sched)))
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let inst = read_instance(&args.instance)?;
    let cfg = event_points(args.nmax)?;
    let solve = args.limits.solve_config()?;
    if args.variant == Variant::Triangle && !inst.satisfies_triangle() {
        writeln!(out, "warning: setups violate the triangle inequality; the triangle model may miss the optimum")
            .map_err(out_err)?;
    }
    let stats = build(&inst, cfg, args.variant).model.stats();
    let (sol, sched) = solve_validated(&inst, cfg, args.variant, &solve)?;
    let outcome = RunOutcome::from_solution(&sol);
    writeln!(
        out,
        "{} status={} objective={} bound={:.6} nodes={} time={:.3}s vars={} rows={}",
        args.variant,
        sol.status,
        outcome.objective_text(),
        sol.best_bound,
        sol.nodes,
        sol.elapsed.as_secs_f64(),
        stats.num_vars,
        stats.num_rows
    )
    .map_err(out_err)?;
    if let (Some(path), Some(sched)) = (&args.out, &sched) {
        fs::write(path, sched.to_json() + "\n")
            .map_err(CliError::io(format!("writing {}", path.display())))?;
    }
    Ok(outcome)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<BenchReport, CliError> {
    let (prefix, configs) = args.shape.configs()?;
    let solve = args.limits.solve_config()?;
    let report = report::run_series(&prefix, &configs, &solve, args.sequential)?;

    let csv = report
        .to_csv()
        .map_err(|e| CliError::Internal(format!("csv: {e}")))?;
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).map_err(CliError::io(format!("writing {}", path.display())))?;
            let json_path = path.with_extension("json");
            fs::write(&json_path, report.to_json() + "\n")
                .map_err(CliError::io(format!("writing {}", json_path.display())))?;
        }
        None => out.write_all(csv.as_bytes()).map_err(out_err)?,
    }
    writeln!(out, "{}", report.summary_line()).map_err(out_err)?;
    if let Some(bad) = report.objective_mismatches().first() {
        return Err(CliError::Internal(format!(
            "instance {} has different optimal objectives: general {:?}, triangle {:?}",
            bad.id, bad.general.objective, bad.triangle.objective
        )));
    }
    Ok(report)
}
