//! The two event-point MILP formulations.
//!
//! Both share the variable grid: `w[u][n]` (technology `u` runs at event point
//! `n`), `y[l][n]` (machine `l` is busy at `n`), start and finish times
//! `Ts[u][n]`, `Tf[u][n]`, and the makespan. They differ in how setups are
//! linked across event points:
//!
//! * **general**: every pair of active points on a machine with no activity in
//!   between is linked by a big-M setup row. Exact for any setup data.
//! * **triangle**: only consecutive points are linked and start times chain
//!   forward. Far fewer rows, but exact only when setups satisfy the triangle
//!   inequality; inactive points may sit at negative times.

use std::fmt;

use thiserror::Error;

use crate::instance::Instance;
use crate::milp::{ColumnId, LinearModel, ModelStats, Sense, VarKind, VariableMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    General,
    Triangle,
}

impl Variant {
    pub const BOTH: [Variant; 2] = [Variant::General, Variant::Triangle];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::Triangle => "triangle",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Variant::General),
            "triangle" => Ok(Variant::Triangle),
            other => Err(format!(
                "unknown variant '{other}' (expected general or triangle)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FormulationError {
    #[error("at least one event point is required")]
    NoEventPoints,
}

/// Number of event points `|N|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventPointConfig {
    points: usize,
}

impl EventPointConfig {
    pub fn new(points: usize) -> Result<Self, FormulationError> {
        if points == 0 {
            return Err(FormulationError::NoEventPoints);
        }
        Ok(Self { points })
    }

    pub fn points(self) -> usize {
        self.points
    }
}

#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub model: LinearModel,
    pub vars: VariableMap,
    /// Big-M constant and horizon bound.
    pub horizon: f64,
    pub variant: Variant,
    /// Set when a triangle model was built for setups that violate the
    /// triangle inequality; its optimum may then be wrong.
    pub triangle_warning: bool,
    pub instance: Instance,
}

fn add_grid(model: &mut LinearModel, inst: &Instance, points: usize, time_lb: f64) -> VariableMap {
    let d = inst.num_technologies();
    let m = inst.num_machines();
    let mut col = |name: String, lo: f64, up: f64, kind: VarKind| -> ColumnId {
        model
            .add_column(name, lo, up, kind)
            .expect("grid names are unique")
    };
    let inf = f64::INFINITY;
    let mut w = Vec::with_capacity(d * points);
    for u in 0..d {
        for n in 0..points {
            w.push(col(
                format!("w_{}_{}", u + 1, n + 1),
                0.0,
                1.0,
                VarKind::Binary,
            ));
        }
    }
    let mut y = Vec::with_capacity(m * points);
    for l in 0..m {
        for n in 0..points {
            y.push(col(
                format!("y_{}_{}", l + 1, n + 1),
                0.0,
                1.0,
                VarKind::Binary,
            ));
        }
    }
    let mut start = Vec::with_capacity(d * points);
    for u in 0..d {
        for n in 0..points {
            start.push(col(
                format!("ts_{}_{}", u + 1, n + 1),
                time_lb,
                inf,
                VarKind::Continuous,
            ));
        }
    }
    let mut finish = Vec::with_capacity(d * points);
    for u in 0..d {
        for n in 0..points {
            finish.push(col(
                format!("tf_{}_{}", u + 1, n + 1),
                time_lb,
                inf,
                VarKind::Continuous,
            ));
        }
    }
    let makespan = col("cmax".to_string(), 0.0, inf, VarKind::Continuous);
    VariableMap::new(d, m, points, w, y, start, finish, makespan)
}

/// Rows shared verbatim by both formulations: makespan linking, machine
/// occupancy, run ordering, run length cap, and volume demand.
struct SharedRows<'a> {
    inst: &'a Instance,
    vars: &'a VariableMap,
}

impl SharedRows<'_> {
    fn makespan(&self, model: &mut LinearModel) {
        let v = self.vars;
        for u in 0..v.techs() {
            for n in 0..v.points() {
                let coeffs = [(v.finish(u, n), 1.0), (v.makespan(), -1.0)];
                add(
                    model,
                    format!("makespan_u{}_n{}", u + 1, n + 1),
                    coeffs,
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    fn machine(&self, model: &mut LinearModel) {
        let v = self.vars;
        for l in 0..v.machines() {
            for n in 0..v.points() {
                let coeffs = self
                    .inst
                    .machine_techs(l)
                    .iter()
                    .map(|&u| (v.w(u, n), 1.0))
                    .chain([(v.y(l, n), -1.0)]);
                add(
                    model,
                    format!("machine_l{}_n{}", l + 1, n + 1),
                    coeffs,
                    Sense::Eq,
                    0.0,
                );
            }
        }
    }

    fn order(&self, model: &mut LinearModel) {
        let v = self.vars;
        for u in 0..v.techs() {
            for n in 0..v.points() {
                let coeffs = [(v.finish(u, n), 1.0), (v.start(u, n), -1.0)];
                add(
                    model,
                    format!("order_u{}_n{}", u + 1, n + 1),
                    coeffs,
                    Sense::Ge,
                    0.0,
                );
            }
        }
    }

    fn length(&self, model: &mut LinearModel) {
        let v = self.vars;
        for u in 0..v.techs() {
            let cap = self
                .inst
                .max_run_length(self.inst.technologies()[u].product);
            for n in 0..v.points() {
                let coeffs = [
                    (v.finish(u, n), 1.0),
                    (v.start(u, n), -1.0),
                    (v.w(u, n), -cap),
                ];
                add(
                    model,
                    format!("length_u{}_n{}", u + 1, n + 1),
                    coeffs,
                    Sense::Le,
                    0.0,
                );
            }
        }
    }

    fn demand(&self, model: &mut LinearModel) {
        let v = self.vars;
        for (i, p) in self.inst.products().iter().enumerate() {
            let mut coeffs = Vec::new();
            for n in 0..v.points() {
                for &u in &p.technologies {
                    let rate = self.inst.technologies()[u].rate;
                    coeffs.push((v.finish(u, n), rate));
                    coeffs.push((v.start(u, n), -rate));
                }
            }
            add(
                model,
                format!("demand_i{}", i + 1),
                coeffs,
                Sense::Ge,
                p.volume,
            );
        }
    }
}

fn add(
    model: &mut LinearModel,
    name: String,
    coeffs: impl IntoIterator<Item = (ColumnId, f64)>,
    sense: Sense,
    rhs: f64,
) {
    model
        .add_row(name, coeffs, sense, rhs)
        .expect("formulation rows are well formed");
}

fn finish_model(mut model: LinearModel, vars: &VariableMap) -> LinearModel {
    model
        .set_objective([(vars.makespan(), 1.0)])
        .expect("makespan column exists");
    model
}

/// Formulation exact for arbitrary setups.
///
/// For machine `l`, technologies `u, q` sharing it (including `u = q`) and
/// points `p < n`, the setup row
/// `Ts[u][n] >= Tf[q][p] + s[l][q][u] - H (2 - w[u][n] - w[q][p] + sum_{p<r<n} y[l][r])`
/// binds exactly when both runs are active and the machine is idle in between.
pub fn build_general(inst: &Instance, cfg: EventPointConfig) -> BuiltModel {
    let points = cfg.points();
    let horizon = inst.horizon();
    let mut model = LinearModel::new();
    let vars = add_grid(&mut model, inst, points, 0.0);
    let shared = SharedRows { inst, vars: &vars };

    shared.makespan(&mut model);
    shared.machine(&mut model);
    for l in 0..inst.num_machines() {
        let techs = inst.machine_techs(l);
        for &u in techs {
            for &q in techs {
                let setup = inst.setup(l, q, u);
                for n in 1..points {
                    for p in 0..n {
                        let mut coeffs = vec![
                            (vars.start(u, n), 1.0),
                            (vars.finish(q, p), -1.0),
                            (vars.w(u, n), -horizon),
                            (vars.w(q, p), -horizon),
                        ];
                        coeffs.extend((p + 1..n).map(|r| (vars.y(l, r), horizon)));
                        let name = format!(
                            "setup_l{}_q{}_u{}_p{}_n{}",
                            l + 1,
                            q + 1,
                            u + 1,
                            p + 1,
                            n + 1
                        );
                        add(&mut model, name, coeffs, Sense::Ge, setup - 2.0 * horizon);
                    }
                }
            }
        }
    }
    shared.order(&mut model);
    shared.length(&mut model);
    shared.demand(&mut model);

    BuiltModel {
        model: finish_model(model, &vars),
        vars,
        horizon,
        variant: Variant::General,
        triangle_warning: false,
        instance: inst.clone(),
    }
}

/// Formulation for setups satisfying the triangle inequality.
///
/// Start times chain forward per technology (`Ts[u][n+1] >= Tf[u][n]`), and a
/// run at `n+1` waits for the setup from every other technology's finish at
/// `n`: `Ts[u][n+1] >= Tf[q][n] + s[l][q][u] w[u][n+1] - H (1 - w[u][n+1])`.
/// Inactive points may start as low as `-H`, which is how a first run on a
/// machine escapes setups from technologies that never ran before it.
pub fn build_triangle(inst: &Instance, cfg: EventPointConfig) -> BuiltModel {
    let points = cfg.points();
    let horizon = inst.horizon();
    let mut model = LinearModel::new();
    let vars = add_grid(&mut model, inst, points, -horizon);
    let shared = SharedRows { inst, vars: &vars };
    let d = inst.num_technologies();

    shared.makespan(&mut model);
    shared.machine(&mut model);
    for u in 0..d {
        for n in 0..points.saturating_sub(1) {
            let coeffs = [(vars.start(u, n + 1), 1.0), (vars.finish(u, n), -1.0)];
            add(
                &mut model,
                format!("chain_u{}_n{}", u + 1, n + 1),
                coeffs,
                Sense::Ge,
                0.0,
            );
        }
    }
    for l in 0..inst.num_machines() {
        let techs = inst.machine_techs(l);
        for &u in techs {
            for &q in techs {
                if u == q {
                    continue;
                }
                let setup = inst.setup(l, q, u);
                for n in 0..points.saturating_sub(1) {
                    let coeffs = [
                        (vars.start(u, n + 1), 1.0),
                        (vars.finish(q, n), -1.0),
                        (vars.w(u, n + 1), -(setup + horizon)),
                    ];
                    let name = format!("setup_l{}_q{}_u{}_n{}", l + 1, q + 1, u + 1, n + 1);
                    add(&mut model, name, coeffs, Sense::Ge, -horizon);
                }
            }
        }
    }
    for u in 0..d {
        for n in 0..points {
            let coeffs = [(vars.start(u, n), 1.0), (vars.w(u, n), -horizon)];
            add(
                &mut model,
                format!("first_u{}_n{}", u + 1, n + 1),
                coeffs,
                Sense::Ge,
                -horizon,
            );
        }
    }
    shared.order(&mut model);
    shared.length(&mut model);
    shared.demand(&mut model);

    BuiltModel {
        model: finish_model(model, &vars),
        vars,
        horizon,
        variant: Variant::Triangle,
        triangle_warning: !inst.satisfies_triangle(),
        instance: inst.clone(),
    }
}

pub fn build(inst: &Instance, cfg: EventPointConfig, variant: Variant) -> BuiltModel {
    match variant {
        Variant::General => build_general(inst, cfg),
        Variant::Triangle => build_triangle(inst, cfg),
    }
}

/// Closed-form model size, without building.
///
/// With `d` technologies, `m` machines, `k` products, `n` points,
/// `A = sum_l |K_l|` and `B = sum_l |K_l|^2`:
///
/// * columns: `(3d + m) n + 1` for both variants;
/// * general rows: `3dn + mn + k + B n(n-1)/2`;
/// * triangle rows: `4dn + mn + d(n-1) + k + (B - A)(n-1)`.
pub fn predict_stats(inst: &Instance, cfg: EventPointConfig, variant: Variant) -> ModelStats {
    size_formula(
        inst.num_technologies(),
        inst.num_machines(),
        inst.num_products(),
        inst.incidence_count(),
        inst.incidence_square_sum(),
        cfg.points(),
        variant,
    )
}

/// [`predict_stats`] on raw counts: `d, m, k, A = sum |K_l|, B = sum |K_l|^2, n`.
pub fn size_formula(
    d: usize,
    m: usize,
    k: usize,
    incidences: usize,
    incidence_squares: usize,
    n: usize,
    variant: Variant,
) -> ModelStats {
    let num_vars = (3 * d + m) * n + 1;
    let num_rows = match variant {
        Variant::General => 3 * d * n + m * n + k + incidence_squares * n * (n - 1) / 2,
        Variant::Triangle => {
            4 * d * n + m * n + d * (n - 1) + k + (incidence_squares - incidences) * (n - 1)
        }
    };
    ModelStats { num_vars, num_rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Product, Technology};

    fn lone(points: usize) -> (Instance, EventPointConfig) {
        let inst = Instance::new(
            1,
            vec![Product {
                volume: 10.0,
                technologies: vec![0],
            }],
            vec![Technology {
                product: 0,
                machines: vec![0],
                rate: 2.0,
            }],
            vec![vec![0.0]],
        )
        .unwrap();
        (inst, EventPointConfig::new(points).unwrap())
    }

    fn count_prefix(b: &BuiltModel, prefix: &str) -> usize {
        b.model
            .rows()
            .iter()
            .filter(|r| r.name.starts_with(prefix))
            .count()
    }

    #[test]
    fn general_single_technology_rows() {
        let (inst, cfg) = lone(1);
        let b = build_general(&inst, cfg);
        assert_eq!(
            b.model.stats(),
            ModelStats {
                num_vars: 5,
                num_rows: 5
            }
        );
        assert_eq!(count_prefix(&b, "setup"), 0);

        let (inst, cfg) = lone(2);
        let b = build_general(&inst, cfg);
        assert_eq!(
            b.model.stats(),
            ModelStats {
                num_vars: 9,
                num_rows: 10
            }
        );
        for (prefix, count) in [
            ("makespan", 2),
            ("machine", 2),
            ("setup", 1),
            ("order", 2),
            ("length", 2),
            ("demand", 1),
        ] {
            assert_eq!(count_prefix(&b, prefix), count, "{prefix}");
        }
    }

    #[test]
    fn triangle_single_technology_rows() {
        let (inst, cfg) = lone(1);
        let b = build_triangle(&inst, cfg);
        assert_eq!(
            b.model.stats(),
            ModelStats {
                num_vars: 5,
                num_rows: 6
            }
        );
        for (prefix, count) in [
            ("makespan", 1),
            ("machine", 1),
            ("chain", 0),
            ("setup", 0),
            ("first", 1),
            ("order", 1),
            ("length", 1),
            ("demand", 1),
        ] {
            assert_eq!(count_prefix(&b, prefix), count, "{prefix}");
        }
        assert!(!b.triangle_warning);
    }

    #[test]
    fn table_shaped_counts() {
        // d=8, m=4, k=4, A=15, B=69, n=4.
        assert_eq!(
            size_formula(8, 4, 4, 15, 69, 4, Variant::General),
            ModelStats {
                num_vars: 113,
                num_rows: 530
            }
        );
        assert_eq!(
            size_formula(8, 4, 4, 15, 69, 4, Variant::Triangle).num_rows,
            334
        );
        assert_eq!(
            size_formula(13, 7, 5, 0, 0, 5, Variant::General).num_vars,
            231
        );
        assert_eq!(
            size_formula(21, 9, 7, 0, 0, 7, Variant::Triangle).num_vars,
            505
        );
    }

    #[test]
    fn column_sets_agree() {
        let (inst, cfg) = lone(3);
        let g = build_general(&inst, cfg);
        let t = build_triangle(&inst, cfg);
        let names = |b: &BuiltModel| {
            b.model
                .columns()
                .iter()
                .map(|c| (c.name.clone(), c.kind))
                .collect::<Vec<_>>()
        };
        assert_eq!(names(&g), names(&t));
        let ts = t.model.column(t.vars.start(0, 0));
        assert_eq!(ts.lower, -5.0);
        assert_eq!(g.model.column(g.vars.start(0, 0)).lower, 0.0);
    }

    #[test]
    fn rejects_zero_points() {
        assert_eq!(
            EventPointConfig::new(0),
            Err(FormulationError::NoEventPoints)
        );
    }
}
