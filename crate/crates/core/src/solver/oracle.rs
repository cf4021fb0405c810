use super::simplex::{LpStatus, Simplex};
use super::{SolveError, MILP_FEAS_TOL};
use crate::milp::{LinearModel, Row};

pub const ORACLE_MAX_BINARIES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
}

impl OracleOutcome {
    pub fn objective(&self) -> Option<f64> {
        match self {
            OracleOutcome::Optimal { objective, .. } => Some(*objective),
            OracleOutcome::Infeasible => None,
        }
    }
}

/// Enumerates every 0/1 assignment of the binary columns, solves the
/// remaining LP from a cold start for each, and keeps the best.
///
/// Rows that mention binary columns only are checked directly, which skips
/// the LP for most assignments of event-point models.
pub fn brute_force_oracle(model: &LinearModel) -> Result<OracleOutcome, SolveError> {
    let binaries: Vec<usize> = model.binary_columns().map(|c| c.0).collect();
    if binaries.len() > ORACLE_MAX_BINARIES {
        return Err(SolveError::TooManyBinaries(binaries.len()));
    }
    let is_binary = {
        let mut v = vec![false; model.columns().len()];
        binaries.iter().for_each(|&j| v[j] = true);
        v
    };
    let pure: Vec<&Row> = model
        .rows()
        .iter()
        .filter(|r| r.coeffs.iter().all(|(c, _)| is_binary[c.0]))
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut assignment = vec![0.0; model.columns().len()];
    for mask in 0u32..(1u32 << binaries.len()) {
        let mut admissible = true;
        for (b, &j) in binaries.iter().enumerate() {
            let v = ((mask >> b) & 1) as f64;
            let col = &model.columns()[j];
            if v < col.lower || v > col.upper {
                admissible = false;
                break;
            }
            assignment[j] = v;
        }
        if !admissible
            || pure
                .iter()
                .any(|r| r.violation(&assignment) > MILP_FEAS_TOL)
        {
            continue;
        }

        let mut lp = Simplex::new(model);
        for &j in &binaries {
            lp.set_bounds(j, assignment[j], assignment[j]);
        }
        match lp.solve() {
            LpStatus::Optimal => {
                let objective = lp.objective();
                if best.as_ref().is_none_or(|(o, _)| objective < *o) {
                    let mut values = lp.values().to_vec();
                    binaries.iter().for_each(|&j| values[j] = assignment[j]);
                    best = Some((objective, values));
                }
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(SolveError::Unbounded),
            LpStatus::Stalled => return Err(SolveError::Stalled),
        }
    }
    Ok(match best {
        Some((objective, values)) => OracleOutcome::Optimal { objective, values },
        None => OracleOutcome::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Sense, VarKind};
    use crate::solver::solve_lp;

    #[test]
    fn no_binaries_matches_lp() {
        let mut m = LinearModel::new();
        let x = m.add_column("x", 0.0, 10.0, VarKind::Continuous).unwrap();
        let y = m.add_column("y", 0.0, 10.0, VarKind::Continuous).unwrap();
        m.add_row("c", [(x, 1.0), (y, 2.0)], Sense::Ge, 4.0)
            .unwrap();
        m.set_objective([(x, 3.0), (y, 1.0)]).unwrap();
        let lp = solve_lp(&m);
        assert_eq!(
            brute_force_oracle(&m).unwrap().objective(),
            Some(lp.objective)
        );
    }

    #[test]
    fn refuses_large_models() {
        let mut m = LinearModel::new();
        for j in 0..17 {
            m.add_column(format!("b{j}"), 0.0, 1.0, VarKind::Binary)
                .unwrap();
        }
        assert_eq!(brute_force_oracle(&m), Err(SolveError::TooManyBinaries(17)));
    }
}
