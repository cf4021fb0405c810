use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{LpStatus, Simplex};
use super::{MilpSolution, MilpStatus, SolveConfig, SolveError, MILP_FEAS_TOL};
use crate::milp::LinearModel;

const FREE: i8 = -1;

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    /// Per binary column: FREE, 0 or 1.
    fixings: Vec<i8>,
}

// Max-heap order: lowest bound first, then deepest, then oldest.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

struct Search<'a> {
    model: &'a LinearModel,
    binaries: Vec<usize>,
    base: Vec<(f64, f64)>,
    lp: Simplex,
    lp_iterations: usize,
}

impl Search<'_> {
    fn apply(&mut self, fixings: &[i8]) {
        for (b, &j) in self.binaries.iter().enumerate() {
            let want = match fixings[b] {
                FREE => self.base[b],
                v => (v as f64, v as f64),
            };
            if self.lp.bounds(j) != want {
                self.lp.set_bounds(j, want.0, want.1);
            }
        }
    }

    fn solve(&mut self, fixings: &[i8]) -> Result<LpStatus, SolveError> {
        self.apply(fixings);
        let before = self.lp.iterations;
        let mut status = self.lp.solve();
        if status == LpStatus::Stalled {
            // One cold restart before giving up.
            self.lp_iterations += self.lp.iterations - before;
            self.lp = Simplex::new(self.model);
            self.apply(fixings);
            status = self.lp.solve();
            self.lp_iterations += self.lp.iterations;
        } else {
            self.lp_iterations += self.lp.iterations - before;
        }
        match status {
            LpStatus::Stalled => Err(SolveError::Stalled),
            LpStatus::Unbounded => Err(SolveError::Unbounded),
            s => Ok(s),
        }
    }
}

/// Best-bound branch-and-bound over the binary columns of `model`.
///
/// Branches on the most fractional binary (lowest column index on ties).
/// Integral LP solutions are re-solved with binaries fixed to their rounded
/// values before being accepted as incumbents.
pub fn solve_milp(model: &LinearModel, cfg: &SolveConfig) -> Result<MilpSolution, SolveError> {
    if !(cfg.integrality_tol > 0.0 && cfg.relative_gap > 0.0) {
        return Err(SolveError::BadTolerance);
    }
    let started = Instant::now();
    let binaries: Vec<usize> = model.binary_columns().map(|c| c.0).collect();
    let base = binaries
        .iter()
        .map(|&j| {
            let c = &model.columns()[j];
            (c.lower, c.upper)
        })
        .collect();
    let mut search = Search {
        model,
        binaries,
        base,
        lp: Simplex::new(model),
        lp_iterations: 0,
    };
    let gap = |inc: f64| (cfg.relative_gap * inc.abs()).max(1e-9);

    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        depth: 0,
        id: next_id,
        fixings: vec![FREE; search.binaries.len()],
    });
    next_id += 1;

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut limit_hit = false;

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - gap(*inc) {
                // Every open node is at least this bad.
                heap.push(node);
                break;
            }
        }
        let out_of_nodes = cfg.node_limit.is_some_and(|limit| nodes >= limit);
        let out_of_time = cfg
            .time_limit
            .is_some_and(|limit| started.elapsed() >= limit);
        if out_of_nodes || out_of_time {
            heap.push(node);
            limit_hit = true;
            break;
        }
        nodes += 1;

        if search.solve(&node.fixings)? == LpStatus::Infeasible {
            continue;
        }
        let obj = search.lp.objective();
        if let Some((inc, _)) = &incumbent {
            if obj >= inc - gap(*inc) {
                continue;
            }
        }

        let values = search.lp.values().to_vec();
        let mut branch_on: Option<(usize, f64)> = None;
        let mut residual_frac: Option<(usize, f64)> = None;
        for (b, &j) in search.binaries.iter().enumerate() {
            if node.fixings[b] != FREE {
                continue;
            }
            let v = values[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > cfg.integrality_tol && branch_on.is_none_or(|(_, f)| frac > f) {
                branch_on = Some((b, frac));
            }
            if frac > 0.0 && residual_frac.is_none_or(|(_, f)| frac > f) {
                residual_frac = Some((b, frac));
            }
        }

        if branch_on.is_none() {
            let rounded: Vec<i8> = search
                .binaries
                .iter()
                .map(|&j| if values[j] > 0.5 { 1 } else { 0 })
                .collect();
            if search.solve(&rounded)? == LpStatus::Optimal {
                let mut sol = search.lp.values().to_vec();
                for (b, &j) in search.binaries.iter().enumerate() {
                    sol[j] = rounded[b] as f64;
                }
                let value = model.objective_value(&sol);
                let accept = model.max_violation(&sol) <= MILP_FEAS_TOL
                    && incumbent.as_ref().is_none_or(|(inc, _)| value < *inc);
                if accept {
                    incumbent = Some((value, sol));
                }
                continue;
            }
            // Near-integral but not integral: the big-M slack hid an
            // infeasibility, so branch on what is left.
            branch_on = residual_frac;
        }

        if let Some((b, _)) = branch_on {
            for value in [0, 1] {
                let mut fixings = node.fixings.clone();
                fixings[b] = value;
                heap.push(Node {
                    bound: obj,
                    depth: node.depth + 1,
                    id: next_id,
                    fixings,
                });
                next_id += 1;
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let (status, values, objective, best_bound) = match incumbent {
        Some((inc, sol)) => {
            let status = if limit_hit {
                MilpStatus::Feasible
            } else {
                MilpStatus::Optimal
            };
            (status, sol, Some(inc), open_bound.min(inc))
        }
        None if limit_hit => (MilpStatus::Limit, Vec::new(), None, open_bound),
        None => (MilpStatus::Infeasible, Vec::new(), None, f64::INFINITY),
    };
    Ok(MilpSolution {
        status,
        values,
        objective,
        best_bound,
        nodes,
        lp_iterations: search.lp_iterations,
        elapsed: started.elapsed(),
    })
}
