//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row `i` gets a slack `s_i` with `a_i x + s_i = b_i`; the slack's
//! bounds encode the row sense. The slack basis is always a valid start, and
//! any basis can be resumed after bound changes: basic variables that end up
//! outside their bounds are repaired by a composite phase 1 that minimises the
//! sum of infeasibilities, so branch-and-bound can warm start from whatever
//! basis the previous node left behind.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots it falls back
//! to the least-index rule until the objective moves again.

#![allow(clippy::needless_range_loop)]

use crate::milp::{LinearModel, Sense};

pub(crate) const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 400;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration cap reached; only possible through numerical trouble.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

#[derive(Clone)]
pub(crate) struct Simplex {
    nrows: usize,
    ncols: usize,
    ntot: usize,
    /// Structural columns of `A`, sparse by column.
    a_cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// `B^-1 [A | I]`, row-major.
    tab: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    pub(crate) iterations: usize,
}

fn resting_place(lower: f64, upper: f64, prefer_upper: bool) -> (VarState, f64) {
    if prefer_upper && upper.is_finite() {
        (VarState::Upper, upper)
    } else if lower.is_finite() {
        (VarState::Lower, lower)
    } else if upper.is_finite() {
        (VarState::Upper, upper)
    } else {
        (VarState::Zero, 0.0)
    }
}

impl Simplex {
    pub(crate) fn new(model: &LinearModel) -> Self {
        let nrows = model.rows().len();
        let ncols = model.columns().len();
        let ntot = ncols + nrows;

        let mut a_cols = vec![Vec::new(); ncols];
        let mut b = Vec::with_capacity(nrows);
        let mut lower = Vec::with_capacity(ntot);
        let mut upper = Vec::with_capacity(ntot);
        for c in model.columns() {
            lower.push(c.lower);
            upper.push(c.upper);
        }
        for (i, row) in model.rows().iter().enumerate() {
            for &(c, v) in &row.coeffs {
                a_cols[c.0].push((i, v));
            }
            b.push(row.rhs);
            let (lo, up) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(up);
        }
        let mut cost = vec![0.0; ntot];
        for &(c, v) in model.objective() {
            cost[c.0] = v;
        }

        let mut s = Self {
            nrows,
            ncols,
            ntot,
            a_cols,
            b,
            cost,
            lower,
            upper,
            tab: vec![0.0; nrows * ntot],
            basis: Vec::new(),
            state: vec![VarState::Lower; ntot],
            x: vec![0.0; ntot],
            pivots_since_refactor: 0,
            iterations: 0,
        };
        s.reset_to_slack_basis();
        s
    }

    fn reset_to_slack_basis(&mut self) {
        let ntot = self.ntot;
        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for (j, col) in self.a_cols.iter().enumerate() {
            for &(i, v) in col {
                self.tab[i * ntot + j] = v;
            }
        }
        for i in 0..self.nrows {
            self.tab[i * ntot + self.ncols + i] = 1.0;
        }
        self.basis = (self.ncols..self.ntot).collect();
        for j in 0..self.ncols {
            let prefer_upper = self.state[j] == VarState::Upper;
            let (st, v) = resting_place(self.lower[j], self.upper[j], prefer_upper);
            self.state[j] = st;
            self.x[j] = v;
        }
        for i in 0..self.nrows {
            self.state[self.ncols + i] = VarState::Basic(i);
        }
        self.pivots_since_refactor = 0;
        self.recompute_basic_values();
    }

    /// Changes the bounds of structural column `j`, keeping the basis.
    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if let VarState::Basic(_) = self.state[j] {
            return;
        }
        let (st, v) = resting_place(lower, upper, self.state[j] == VarState::Upper);
        let delta = v - self.x[j];
        if delta != 0.0 {
            for i in 0..self.nrows {
                let t = self.tab[i * self.ntot + j];
                if t != 0.0 {
                    self.x[self.basis[i]] -= t * delta;
                }
            }
        }
        self.x[j] = v;
        self.state[j] = st;
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.x[..self.ncols]
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.ncols).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// `x_B = B^-1 b - sum_{j nonbasic} (B^-1 A)_j x_j`, with `B^-1` read off
    /// the slack block of the tableau.
    fn recompute_basic_values(&mut self) {
        let ntot = self.ntot;
        for i in 0..self.nrows {
            let row = &self.tab[i * ntot..(i + 1) * ntot];
            let mut v: f64 = (0..self.nrows)
                .map(|r| row[self.ncols + r] * self.b[r])
                .sum();
            for j in 0..ntot {
                if !matches!(self.state[j], VarState::Basic(_)) && self.x[j] != 0.0 && row[j] != 0.0
                {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
    }

    /// Largest `|A x + s - b|` over rows.
    fn residual(&self) -> f64 {
        let mut r: Vec<f64> = (0..self.nrows)
            .map(|i| self.x[self.ncols + i] - self.b[i])
            .collect();
        for (j, col) in self.a_cols.iter().enumerate() {
            let xj = self.x[j];
            if xj != 0.0 {
                for &(i, v) in col {
                    r[i] += v * xj;
                }
            }
        }
        r.iter()
            .zip(&self.b)
            .map(|(r, b)| r.abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max)
    }

    /// Rebuilds the tableau from the original columns for the current basis.
    /// Falls back to the slack basis if the basis matrix is numerically singular.
    fn refactor(&mut self) {
        let m = self.nrows;
        let ntot = self.ntot;
        // Gauss-Jordan on [B | I].
        let mut bm = vec![0.0; m * m];
        for (pos, &var) in self.basis.iter().enumerate() {
            if var < self.ncols {
                for &(i, v) in &self.a_cols[var] {
                    bm[i * m + pos] = v;
                }
            } else {
                bm[(var - self.ncols) * m + pos] = 1.0;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (p, best) = (c..m)
                .map(|r| (r, bm[r * m + c].abs()))
                .fold((c, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if best < 1e-11 {
                self.reset_to_slack_basis();
                return;
            }
            if p != c {
                for k in 0..m {
                    bm.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = bm[c * m + c];
            for k in 0..m {
                bm[c * m + k] /= piv;
                inv[c * m + k] /= piv;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = bm[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        bm[r * m + k] -= f * bm[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        // Row `pos` of inv now belongs to basis position `pos`.
        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for pos in 0..m {
            let inv_row = &inv[pos * m..(pos + 1) * m];
            let tab_row = &mut self.tab[pos * ntot..(pos + 1) * ntot];
            for (j, col) in self.a_cols.iter().enumerate() {
                tab_row[j] = col.iter().map(|&(i, v)| inv_row[i] * v).sum();
            }
            tab_row[self.ncols..].copy_from_slice(inv_row);
        }
        for (pos, &var) in self.basis.iter().enumerate() {
            self.state[var] = VarState::Basic(pos);
            // Clean the identity columns.
            for i in 0..m {
                self.tab[i * ntot + var] = if i == pos { 1.0 } else { 0.0 };
            }
        }
        self.pivots_since_refactor = 0;
        self.recompute_basic_values();
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let ntot = self.ntot;
        let piv = self.tab[r * ntot + j];
        let (head, rest) = self.tab.split_at_mut(r * ntot);
        let (prow, tail) = rest.split_at_mut(ntot);
        let mut nz = Vec::with_capacity(ntot);
        for (k, v) in prow.iter_mut().enumerate() {
            if *v != 0.0 {
                *v /= piv;
                nz.push(k);
            }
        }
        prow[j] = 1.0;
        let update = |row: &mut [f64]| {
            let f = row[j];
            if f != 0.0 {
                for &k in &nz {
                    row[k] -= f * prow[k];
                }
                row[j] = 0.0;
            }
        };
        head.chunks_exact_mut(ntot).for_each(update);
        tail.chunks_exact_mut(ntot).for_each(update);

        // Caller sets the leaving variable's nonbasic state.
        self.basis[r] = j;
        self.state[j] = VarState::Basic(r);
        self.pivots_since_refactor += 1;
    }

    fn iteration_cap(&self) -> usize {
        20_000 + 50 * (self.nrows + self.ncols)
    }

    pub(crate) fn solve(&mut self) -> LpStatus {
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
        let cap = self.iteration_cap();
        let mut steps = 0usize;
        let mut degenerate = 0usize;
        let mut checked_clean = false;
        let mut cb = vec![0.0; self.nrows];
        let mut d = vec![0.0; self.ntot];
        loop {
            if steps >= cap {
                return LpStatus::Stalled;
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }

            let mut phase1 = false;
            for i in 0..self.nrows {
                let k = self.basis[i];
                cb[i] = if self.x[k] < self.lower[k] - PRIMAL_TOL {
                    phase1 = true;
                    -1.0
                } else if self.x[k] > self.upper[k] + PRIMAL_TOL {
                    phase1 = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase1 {
                for i in 0..self.nrows {
                    cb[i] = self.cost[self.basis[i]];
                }
            }

            // Reduced costs d = c_N - cb^T tab.
            if phase1 {
                d.iter_mut().for_each(|v| *v = 0.0);
            } else {
                d.copy_from_slice(&self.cost);
            }
            for i in 0..self.nrows {
                let c = cb[i];
                if c != 0.0 {
                    let row = &self.tab[i * self.ntot..(i + 1) * self.ntot];
                    for (dj, &t) in d.iter_mut().zip(row) {
                        *dj -= c * t;
                    }
                }
            }

            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ntot {
                let dir = match self.state[j] {
                    VarState::Basic(_) => continue,
                    _ if self.lower[j] == self.upper[j] => continue,
                    VarState::Lower if d[j] < -DUAL_TOL => 1.0,
                    VarState::Upper if d[j] > DUAL_TOL => -1.0,
                    VarState::Zero if d[j].abs() > DUAL_TOL => -d[j].signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d[j].abs() > best {
                    best = d[j].abs();
                    entering = Some((j, dir));
                }
            }

            let Some((j, dir)) = entering else {
                // Candidate optimum (or phase-1 dead end): make sure it is not
                // an artefact of accumulated round-off before reporting.
                if !checked_clean || self.residual() > RESIDUAL_TOL {
                    checked_clean = true;
                    steps += 1;
                    if self.residual() > RESIDUAL_TOL {
                        self.refactor();
                    } else {
                        self.recompute_basic_values();
                    }
                    continue;
                }
                return if phase1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            };

            // Ratio test.
            let mut step = if self.lower[j].is_finite() && self.upper[j].is_finite() {
                self.upper[j] - self.lower[j]
            } else {
                f64::INFINITY
            };
            let mut leave: Option<(usize, VarState, f64)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.nrows {
                let alpha = dir * self.tab[i * self.ntot + j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let k = self.basis[i];
                let (xk, lo, up) = (self.x[k], self.lower[k], self.upper[k]);
                let limit = if alpha > 0.0 {
                    if xk > up + PRIMAL_TOL {
                        Some(((xk - up) / alpha, VarState::Upper, up))
                    } else if xk >= lo - PRIMAL_TOL && lo.is_finite() {
                        Some((((xk - lo) / alpha).max(0.0), VarState::Lower, lo))
                    } else {
                        None
                    }
                } else if xk < lo - PRIMAL_TOL {
                    Some(((lo - xk) / -alpha, VarState::Lower, lo))
                } else if xk <= up + PRIMAL_TOL && up.is_finite() {
                    Some((((up - xk) / -alpha).max(0.0), VarState::Upper, up))
                } else {
                    None
                };
                let Some((t, st, bound)) = limit else {
                    continue;
                };
                let better = match leave {
                    _ if t < step - 1e-12 => true,
                    _ if t > step + 1e-12 => false,
                    None => true,
                    Some((r, _, _)) => {
                        if bland {
                            k < self.basis[r]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    }
                };
                if better {
                    step = t;
                    leave = Some((i, st, bound));
                    leave_alpha = alpha.abs();
                }
            }

            if step.is_infinite() {
                if phase1 {
                    // A phase-1 ray cannot exist; rebuild and retry.
                    self.refactor();
                    steps += 1;
                    continue;
                }
                return LpStatus::Unbounded;
            }

            steps += 1;
            self.iterations += 1;
            degenerate = if step <= 1e-12 { degenerate + 1 } else { 0 };
            checked_clean = false;

            if step != 0.0 {
                for i in 0..self.nrows {
                    let t = self.tab[i * self.ntot + j];
                    if t != 0.0 {
                        self.x[self.basis[i]] -= step * dir * t;
                    }
                }
                self.x[j] += step * dir;
            }
            match leave {
                None => {
                    // Bound flip.
                    let (st, v) = if dir > 0.0 {
                        (VarState::Upper, self.upper[j])
                    } else {
                        (VarState::Lower, self.lower[j])
                    };
                    self.state[j] = st;
                    self.x[j] = v;
                }
                Some((r, st, bound)) => {
                    let k = self.basis[r];
                    self.pivot(r, j);
                    self.state[k] = st;
                    self.x[k] = bound;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::VarKind;

    fn lp(rows: &[(&[f64], Sense, f64)], obj: &[f64], bounds: &[(f64, f64)]) -> LinearModel {
        let mut m = LinearModel::new();
        let cols: Vec<_> = bounds
            .iter()
            .enumerate()
            .map(|(j, &(lo, up))| {
                m.add_column(format!("x{j}"), lo, up, VarKind::Continuous)
                    .unwrap()
            })
            .collect();
        for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
            let terms = coeffs.iter().enumerate().map(|(j, &a)| (cols[j], a));
            m.add_row(format!("r{i}"), terms, *sense, *rhs).unwrap();
        }
        m.set_objective(obj.iter().enumerate().map(|(j, &c)| (cols[j], c)))
            .unwrap();
        m
    }

    #[test]
    fn bound_flip_and_pivots() {
        // min -x - y : x + y <= 1.5, x, y in [0, 1]
        let m = lp(
            &[(&[1.0, 1.0], Sense::Le, 1.5)],
            &[-1.0, -1.0],
            &[(0.0, 1.0), (0.0, 1.0)],
        );
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.objective() + 1.5).abs() < 1e-12);
    }

    #[test]
    fn free_variable_and_equalities() {
        // min x : x - y = -2, y in [1, 3], x free
        let inf = f64::INFINITY;
        let m = lp(
            &[(&[1.0, -1.0], Sense::Eq, -2.0)],
            &[1.0, 0.0],
            &[(-inf, inf), (1.0, 3.0)],
        );
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.values()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_after_bound_change() {
        // min -x - 2y : x + y <= 4, x <= 3, y <= 3
        let m = lp(
            &[(&[1.0, 1.0], Sense::Le, 4.0)],
            &[-1.0, -2.0],
            &[(0.0, 3.0), (0.0, 3.0)],
        );
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.objective() + 7.0).abs() < 1e-12);
        s.set_bounds(1, 0.0, 1.0);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.objective() + 5.0).abs() < 1e-12);
        s.set_bounds(0, 3.5, 4.0);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.objective() + 4.5).abs() < 1e-12);
        s.set_bounds(0, 5.0, 6.0);
        assert_eq!(s.solve(), LpStatus::Infeasible);
        s.set_bounds(0, 0.0, 3.0);
        s.set_bounds(1, 0.0, 3.0);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.objective() + 7.0).abs() < 1e-12);
    }

    #[test]
    fn refactor_preserves_solution() {
        let m = lp(
            &[
                (&[1.0, 2.0, 1.0], Sense::Ge, 4.0),
                (&[3.0, 1.0, -1.0], Sense::Ge, 2.0),
            ],
            &[2.0, 3.0, 1.0],
            &[(0.0, f64::INFINITY); 3],
        );
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve(), LpStatus::Optimal);
        let before = s.objective();
        s.refactor();
        assert!((s.objective() - before).abs() < 1e-12);
        assert_eq!(s.solve(), LpStatus::Optimal);
        assert!((s.objective() - before).abs() < 1e-12);
    }
}
