use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::simplex::{LpStatus, Presolve, Simplex};
use super::{relative_gap, MilpProblem, MilpSolution, MilpStatus};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MilpOptions {
    pub gap_tol: f64,
    pub int_tol: f64,
    pub node_limit: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: f64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            int_tol: 1e-6,
            node_limit: 200_000,
            time_limit: 600.0,
        }
    }
}

#[derive(Debug)]
struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    /// Tightened bounds relative to the root, `(var, lower, upper)`.
    fixings: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Max-heap order: smallest bound first, then deeper, then older.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

/// Best-bound branch and bound on the most fractional variable (lowest index
/// on ties). Node relaxations are warm-started from the previous basis.
pub fn solve_milp(problem: &MilpProblem, options: &MilpOptions) -> Result<MilpSolution> {
    problem.validate()?;
    let started = Instant::now();
    let deadline = Duration::from_secs_f64(options.time_limit.max(0.0));
    let mut lp = match Simplex::new(problem) {
        Ok(lp) => lp,
        Err(Presolve::Infeasible) => {
            return Ok(MilpSolution::without_incumbent(MilpStatus::Infeasible, f64::INFINITY, 0));
        }
    };
    let integer: Vec<usize> = (0..problem.num_vars()).filter(|&j| problem.vars[j].kind.is_integral()).collect();
    let root_bounds: Vec<(f64, f64)> = integer.iter().map(|&j| lp.bounds(j)).collect();
    for (&j, &(l, u)) in integer.iter().zip(&root_bounds) {
        // integral bounds on integer variables
        lp.set_bounds(j, l.ceil(), u.floor());
    }
    let root_bounds: Vec<(f64, f64)> = integer.iter().map(|&j| lp.bounds(j)).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node { bound: f64::NEG_INFINITY, depth: 0, id: 0, fixings: Vec::new() });
    let mut next_id = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0usize;
    let mut applied: Vec<(usize, f64, f64)> = Vec::new();

    let cutoff = |inc: &Option<(f64, Vec<f64>)>| match inc {
        Some((obj, _)) => obj - options.gap_tol * obj.abs().max(1.0),
        None => f64::INFINITY,
    };

    while let Some(node) = heap.pop() {
        if node.bound >= cutoff(&incumbent) {
            // every remaining node is at least as bad
            heap.clear();
            break;
        }
        if nodes >= options.node_limit || started.elapsed() > deadline {
            let status = if nodes >= options.node_limit { MilpStatus::NodeLimit } else { MilpStatus::GapLimit };
            let bound = node.bound.min(heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min));
            return Ok(finish(problem, status, incumbent, bound, nodes));
        }
        nodes += 1;

        // undo the previous node's fixings, then apply this node's
        for &(j, _, _) in &applied {
            let k = integer.binary_search(&j).expect("fixings reference integer variables");
            lp.set_bounds(j, root_bounds[k].0, root_bounds[k].1);
        }
        for &(j, l, u) in &node.fixings {
            lp.set_bounds(j, l, u);
        }
        applied.clone_from(&node.fixings);

        match lp.solve()? {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if incumbent.is_none() && node.depth == 0 {
                    return Ok(MilpSolution::without_incumbent(MilpStatus::Unbounded, f64::NEG_INFINITY, nodes));
                }
                continue;
            }
            LpStatus::Optimal => {}
        }
        let obj = lp.objective();
        if obj >= cutoff(&incumbent) {
            continue;
        }
        let x = lp.values();
        let mut branch: Option<(usize, f64)> = None;
        for &j in &integer {
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist > options.int_tol && branch.is_none_or(|(_, best)| dist > best + 1e-12) {
                branch = Some((j, dist));
            }
        }
        match branch {
            None => {
                if let Some((value, values)) = polish(&mut lp, &integer, &x)? {
                    if incumbent.as_ref().is_none_or(|(best, _)| value < *best) {
                        incumbent = Some((value, values));
                    }
                }
                // polish changed bounds on every integer variable
                applied = integer.iter().map(|&j| (j, 0.0, 0.0)).collect();
            }
            Some((j, _)) => {
                let (l, u) = lp.bounds(j);
                let down = x[j].floor();
                for (lo, hi) in [(l, down), (down + 1.0, u)] {
                    let mut fixings = node.fixings.clone();
                    match fixings.iter_mut().find(|f| f.0 == j) {
                        Some(f) => *f = (j, lo, hi),
                        None => fixings.push((j, lo, hi)),
                    }
                    heap.push(Node { bound: obj, depth: node.depth + 1, id: next_id, fixings });
                    next_id += 1;
                }
            }
        }
    }

    let bound = match &incumbent {
        Some((obj, _)) => heap.iter().map(|n| n.bound).fold(*obj, f64::min),
        None => f64::INFINITY,
    };
    let status = if incumbent.is_some() { MilpStatus::Optimal } else { MilpStatus::Infeasible };
    Ok(finish(problem, status, incumbent, bound, nodes))
}

/// Fixes the integer variables at their rounded values and re-solves for the
/// continuous ones so that rows hold to simplex accuracy.
fn polish(lp: &mut Simplex, integer: &[usize], x: &[f64]) -> Result<Option<(f64, Vec<f64>)>> {
    for &j in integer {
        let v = x[j].round();
        lp.set_bounds(j, v, v);
    }
    match lp.solve()? {
        LpStatus::Optimal => {
            let mut values = lp.values();
            for &j in integer {
                values[j] = values[j].round();
            }
            Ok(Some((lp.objective(), values)))
        }
        _ => Ok(None),
    }
}

fn finish(
    problem: &MilpProblem,
    status: MilpStatus,
    incumbent: Option<(f64, Vec<f64>)>,
    bound: f64,
    nodes: usize,
) -> MilpSolution {
    match incumbent {
        Some((_, values)) => {
            let objective = problem.objective_value(&values);
            let bound = bound.min(objective);
            MilpSolution {
                status,
                objective,
                bound,
                gap: relative_gap(objective, bound),
                values,
                nodes_explored: nodes,
            }
        }
        None => {
            let mut s = MilpSolution::without_incumbent(status, bound, nodes);
            if problem.num_vars() == 0 && status == MilpStatus::Optimal {
                s.objective = 0.0;
            }
            s
        }
    }
}
