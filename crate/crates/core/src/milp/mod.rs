//! Solver-agnostic MILP representation.

mod lp_format;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use lp_format::{parse_lp, write_lp, LpParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(ColumnId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(c, a)| a * values[c.0]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelStats {
    pub num_vars: usize,
    pub num_rows: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("column name '{0}' already used")]
    DuplicateColumn(String),
    #[error("row name '{0}' already used")]
    DuplicateRow(String),
    #[error("column '{name}' has inverted bounds [{lower}, {upper}]")]
    InvertedBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("binary column '{name}' has bounds [{lower}, {upper}] outside [0, 1]")]
    BinaryBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("row '{row}' references unknown column {column}")]
    UnknownColumn { row: String, column: usize },
    #[error("non-finite coefficient in '{0}'")]
    NonFinite(String),
}

/// A minimisation MILP: columns with bounds and integrality, linear rows, and
/// a sparse objective. Variable bounds are never stored as rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    columns: Vec<Column>,
    rows: Vec<Row>,
    objective: Vec<(ColumnId, f64)>,
    column_names: HashMap<String, ColumnId>,
    row_names: HashSet<String>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> Result<ColumnId, ModelError> {
        let name = name.into();
        if self.column_names.contains_key(&name) {
            return Err(ModelError::DuplicateColumn(name));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::InvertedBounds { name, lower, upper });
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(ModelError::BinaryBounds { name, lower, upper });
        }
        let id = ColumnId(self.columns.len());
        self.column_names.insert(name.clone(), id);
        self.columns.push(Column {
            name,
            lower,
            upper,
            kind,
        });
        Ok(id)
    }

    /// Appends a row. Repeated columns are merged and zero coefficients dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (ColumnId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, ModelError> {
        let name = name.into();
        if self.row_names.contains(&name) {
            return Err(ModelError::DuplicateRow(name));
        }
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        let coeffs = self.normalise(&name, coeffs)?;
        let id = RowId(self.rows.len());
        self.row_names.insert(name.clone());
        self.rows.push(Row {
            name,
            coeffs,
            sense,
            rhs,
        });
        Ok(id)
    }

    pub fn set_objective(
        &mut self,
        coeffs: impl IntoIterator<Item = (ColumnId, f64)>,
    ) -> Result<(), ModelError> {
        self.objective = self.normalise("objective", coeffs)?;
        Ok(())
    }

    fn normalise(
        &self,
        context: &str,
        coeffs: impl IntoIterator<Item = (ColumnId, f64)>,
    ) -> Result<Vec<(ColumnId, f64)>, ModelError> {
        let mut out: Vec<(ColumnId, f64)> = Vec::new();
        for (col, a) in coeffs {
            if col.0 >= self.columns.len() {
                return Err(ModelError::UnknownColumn {
                    row: context.to_string(),
                    column: col.0,
                });
            }
            if !a.is_finite() {
                return Err(ModelError::NonFinite(context.to_string()));
            }
            match out.iter_mut().find(|(c, _)| *c == col) {
                Some(entry) => entry.1 += a,
                None => out.push((col, a)),
            }
        }
        out.retain(|&(_, a)| a != 0.0);
        Ok(out)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, id: ColumnId) -> &Column {
        &self.columns[id.0]
    }

    pub fn column_id(&self, name: &str) -> Option<ColumnId> {
        self.column_names.get(name).copied()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[(ColumnId, f64)] {
        &self.objective
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(c, a)| a * values[c.0]).sum()
    }

    pub fn binary_columns(&self) -> impl Iterator<Item = ColumnId> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == VarKind::Binary)
            .map(|(j, _)| ColumnId(j))
    }

    pub fn num_binaries(&self) -> usize {
        self.binary_columns().count()
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            num_vars: self.columns.len(),
            num_rows: self.rows.len(),
        }
    }

    /// Largest row violation or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(values));
        let bounds = self
            .columns
            .iter()
            .zip(values)
            .map(|(c, &v)| (c.lower - v).max(v - c.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

/// Column lookup for the event-point variable grid: `w[u][n]`, `y[l][n]`,
/// `Ts[u][n]`, `Tf[u][n]` and the makespan.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    techs: usize,
    machines: usize,
    points: usize,
    w: Vec<ColumnId>,
    y: Vec<ColumnId>,
    start: Vec<ColumnId>,
    finish: Vec<ColumnId>,
    makespan: ColumnId,
}

impl VariableMap {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        techs: usize,
        machines: usize,
        points: usize,
        w: Vec<ColumnId>,
        y: Vec<ColumnId>,
        start: Vec<ColumnId>,
        finish: Vec<ColumnId>,
        makespan: ColumnId,
    ) -> Self {
        assert_eq!(w.len(), techs * points);
        assert_eq!(y.len(), machines * points);
        assert_eq!(start.len(), techs * points);
        assert_eq!(finish.len(), techs * points);
        Self {
            techs,
            machines,
            points,
            w,
            y,
            start,
            finish,
            makespan,
        }
    }

    pub fn techs(&self) -> usize {
        self.techs
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn w(&self, u: usize, n: usize) -> ColumnId {
        self.w[u * self.points + n]
    }

    pub fn y(&self, l: usize, n: usize) -> ColumnId {
        self.y[l * self.points + n]
    }

    pub fn start(&self, u: usize, n: usize) -> ColumnId {
        self.start[u * self.points + n]
    }

    pub fn finish(&self, u: usize, n: usize) -> ColumnId {
        self.finish[u * self.points + n]
    }

    pub fn makespan(&self) -> ColumnId {
        self.makespan
    }

    /// Number of columns covered by the map.
    pub fn len(&self) -> usize {
        3 * self.techs * self.points + self.machines * self.points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_columns_and_rows() {
        let mut m = LinearModel::new();
        assert_eq!(
            m.stats(),
            ModelStats {
                num_vars: 0,
                num_rows: 0
            }
        );
        let w = m.add_column("w_1_1", 0.0, 1.0, VarKind::Binary).unwrap();
        let c = m
            .add_column("cmax", 0.0, f64::INFINITY, VarKind::Continuous)
            .unwrap();
        assert_eq!(m.stats().num_vars, 2);
        m.add_row("lb", [(c, 1.0)], Sense::Ge, 3.0).unwrap();
        m.add_row("vacuous", [], Sense::Ge, 0.0).unwrap();
        assert_eq!(
            m.stats(),
            ModelStats {
                num_vars: 2,
                num_rows: 2
            }
        );
        assert_eq!(
            m.add_column("w_1_1", 0.0, 1.0, VarKind::Binary),
            Err(ModelError::DuplicateColumn("w_1_1".into()))
        );
        assert!(matches!(
            m.add_row("bad", [(ColumnId(9), 1.0)], Sense::Le, 0.0),
            Err(ModelError::UnknownColumn { column: 9, .. })
        ));
        assert!(matches!(
            m.add_row("lb", [(w, 1.0)], Sense::Le, 1.0),
            Err(ModelError::DuplicateRow(_))
        ));
        assert!(matches!(
            m.add_column("x", 2.0, 1.0, VarKind::Continuous),
            Err(ModelError::InvertedBounds { .. })
        ));
        assert!(matches!(
            m.add_column("b", 0.0, 2.0, VarKind::Binary),
            Err(ModelError::BinaryBounds { .. })
        ));
    }

    #[test]
    fn merges_repeated_coefficients() {
        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, 1.0, VarKind::Continuous).unwrap();
        let y = m.add_column("y", 0.0, 1.0, VarKind::Continuous).unwrap();
        m.add_row(
            "r",
            [(x, 1.0), (y, 2.0), (x, 0.5), (y, -2.0)],
            Sense::Le,
            1.0,
        )
        .unwrap();
        assert_eq!(m.rows()[0].coeffs, vec![(x, 1.5)]);
    }

    #[test]
    fn violation_measures() {
        let row = Row {
            name: "r".into(),
            coeffs: vec![(ColumnId(0), 2.0)],
            sense: Sense::Eq,
            rhs: 1.0,
        };
        assert_eq!(row.violation(&[0.5]), 0.0);
        assert_eq!(row.violation(&[1.0]), 1.0);
    }
}
