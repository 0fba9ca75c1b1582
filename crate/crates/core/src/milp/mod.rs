//! Generic sparse mixed-integer linear programs (minimisation).
//!
//! [`solve_lp`] runs a bounded-variable primal/dual simplex on the continuous
//! relaxation and [`solve_milp`] wraps it in best-bound branch and bound.
//! [`adapter`] hands problems to an external executable through the LP text
//! format in [`lp_format`].

pub mod adapter;
mod branch_bound;
pub mod lp_format;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use branch_bound::{solve_milp, MilpOptions};
pub use simplex::{solve_lp, LpSolution, LpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
    /// General integer; only produced by LP files with a `Generals` section.
    Integer,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub cmp: Comparator,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.cmp {
            Comparator::Le => (lhs - self.rhs).max(0.0),
            Comparator::Ge => (self.rhs - lhs).max(0.0),
            Comparator::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub cost: f64,
}

/// `min c'x` subject to sparse rows and per-variable bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpProblem {
    pub vars: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind, cost: f64) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper, kind, cost });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.add_var(name, 0.0, 1.0, VarKind::Binary, cost)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.add_var(name, lower, upper, VarKind::Continuous, cost)
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, cmp: Comparator, rhs: f64) -> usize {
        self.constraints.push(Constraint { name: name.into(), coeffs, cmp, rhs });
        self.constraints.len() - 1
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.vars.iter().filter(|v| v.kind == kind).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, x)| v.cost * x).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (j, v) in self.vars.iter().enumerate() {
            if !v.cost.is_finite() {
                return Err(Error::domain(format!("variable {j} ({}) has a non-finite cost", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(Error::domain(format!("variable {j} ({}) has invalid bounds", v.name)));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::domain(format!("binary variable {j} ({}) has bounds outside [0, 1]", v.name)));
            }
        }
        let n = self.vars.len();
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(Error::domain(format!("row {i} ({}) has a non-finite right-hand side", c.name)));
            }
            for &(j, a) in &c.coeffs {
                if j >= n {
                    return Err(Error::domain(format!("row {i} ({}) references variable {j} of {n}", c.name)));
                }
                if !a.is_finite() {
                    return Err(Error::domain(format!("row {i} ({}) has a non-finite coefficient", c.name)));
                }
            }
        }
        Ok(())
    }

    /// Largest row violation, bound violation and integrality residual of `x`.
    pub fn residuals(&self, x: &[f64]) -> Residuals {
        let mut r = Residuals::default();
        for c in &self.constraints {
            r.row = r.row.max(c.violation(x));
        }
        for (v, &xj) in self.vars.iter().zip(x) {
            r.bound = r.bound.max(v.lower - xj).max(xj - v.upper);
            if v.kind.is_integral() {
                r.integrality = r.integrality.max((xj - xj.round()).abs());
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub row: f64,
    pub bound: f64,
    pub integrality: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped on the time limit before the gap closed.
    GapLimit,
    NodeLimit,
}

impl MilpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "Optimal",
            MilpStatus::Infeasible => "Infeasible",
            MilpStatus::Unbounded => "Unbounded",
            MilpStatus::GapLimit => "GapLimit",
            MilpStatus::NodeLimit => "NodeLimit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "optimal" => MilpStatus::Optimal,
            "infeasible" => MilpStatus::Infeasible,
            "unbounded" => MilpStatus::Unbounded,
            "gaplimit" => MilpStatus::GapLimit,
            "nodelimit" => MilpStatus::NodeLimit,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent values; empty when no integer-feasible point was found.
    pub values: Vec<f64>,
    /// Incumbent objective, `+inf` without an incumbent.
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub gap: f64,
    pub nodes_explored: usize,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty() || (self.objective.is_finite() && self.status == MilpStatus::Optimal)
    }

    pub(crate) fn without_incumbent(status: MilpStatus, bound: f64, nodes: usize) -> Self {
        Self {
            status,
            values: Vec::new(),
            objective: f64::INFINITY,
            bound,
            gap: f64::INFINITY,
            nodes_explored: nodes,
        }
    }
}

/// Relative gap used for termination: `(incumbent - bound) / max(1, |incumbent|)`.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}
