//! Dense-tableau bounded-variable simplex.
//!
//! Every row `i` gets a logical variable `s_i = a_i x` whose bounds encode the
//! comparator, so the system is homogeneous and a basic variable's value is
//! always `-sum_j T[i][j] x_j` over the nonbasic columns. Nonbasic variables
//! sit at a finite bound (or anywhere, when free).
//!
//! A solve starts from whatever basis the tableau currently holds: dual
//! simplex when that basis is dual feasible, otherwise a composite primal
//! phase 1 that minimises the sum of bound infeasibilities, followed by primal
//! phase 2. Dantzig pricing switches to Bland's rule after a run of
//! degenerate pivots.

use serde::{Deserialize, Serialize};

use super::{Comparator, MilpProblem};
use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Equal to `objective` at an optimum; `-inf` when unbounded.
    pub dual_bound: f64,
    pub iterations: usize,
}

/// Solves the continuous relaxation of `problem`.
pub fn solve_lp(problem: &MilpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let mut lp = match Simplex::new(problem) {
        Ok(lp) => lp,
        Err(Presolve::Infeasible) => {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective: f64::INFINITY,
                dual_bound: f64::INFINITY,
                iterations: 0,
            })
        }
    };
    let status = lp.solve()?;
    let values = lp.values();
    let objective = match status {
        LpStatus::Optimal => problem.objective_value(&values),
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => f64::NEG_INFINITY,
    };
    Ok(LpSolution {
        status,
        values,
        objective,
        dual_bound: objective,
        iterations: lp.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    Free,
}

pub(crate) enum Presolve {
    Infeasible,
}

#[derive(Clone)]
pub(crate) struct Simplex {
    m: usize,
    n: usize,
    cols: usize,
    tab: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    rows: Vec<Vec<(usize, f64)>>,
    dual_tol: f64,
    pub(crate) iterations: usize,
    max_iterations: usize,
    degenerate_run: usize,
}

enum Ratio {
    Flip(f64),
    Pivot { row: usize, theta: f64, to_upper: bool },
    Unbounded,
}

impl Simplex {
    /// Builds the slack-basis tableau. Empty rows are checked and dropped.
    pub(crate) fn new(problem: &MilpProblem) -> std::result::Result<Self, Presolve> {
        let n = problem.num_vars();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut slack_bounds = Vec::new();
        for c in &problem.constraints {
            let mut dense: Vec<(usize, f64)> = Vec::with_capacity(c.coeffs.len());
            let mut sorted = c.coeffs.clone();
            sorted.sort_by_key(|&(j, _)| j);
            for (j, a) in sorted {
                match dense.last_mut() {
                    Some((lj, la)) if *lj == j => *la += a,
                    _ => dense.push((j, a)),
                }
            }
            dense.retain(|&(_, a)| a != 0.0);
            if dense.is_empty() {
                let ok = match c.cmp {
                    Comparator::Le => 0.0 <= c.rhs + FEAS_TOL,
                    Comparator::Ge => 0.0 >= c.rhs - FEAS_TOL,
                    Comparator::Eq => c.rhs.abs() <= FEAS_TOL,
                };
                if !ok {
                    return Err(Presolve::Infeasible);
                }
                continue;
            }
            slack_bounds.push(match c.cmp {
                Comparator::Le => (f64::NEG_INFINITY, c.rhs),
                Comparator::Ge => (c.rhs, f64::INFINITY),
                Comparator::Eq => (c.rhs, c.rhs),
            });
            rows.push(dense);
        }
        let m = rows.len();
        let cols = n + m;
        let mut lb = Vec::with_capacity(cols);
        let mut ub = Vec::with_capacity(cols);
        let mut cost = vec![0.0; cols];
        for (j, v) in problem.vars.iter().enumerate() {
            lb.push(v.lower);
            ub.push(v.upper);
            cost[j] = v.cost;
        }
        for &(l, u) in &slack_bounds {
            lb.push(l);
            ub.push(u);
        }
        for j in 0..n {
            if lb[j] > ub[j] {
                return Err(Presolve::Infeasible);
            }
        }

        let mut tab = vec![0.0; m * cols];
        for (i, row) in rows.iter().enumerate() {
            for &(j, a) in row {
                tab[i * cols + j] = -a;
            }
            tab[i * cols + n + i] = 1.0;
        }
        let scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let mut lp = Simplex {
            m,
            n,
            cols,
            tab,
            d: cost.clone(),
            cost,
            lb,
            ub,
            x: vec![0.0; cols],
            basis: (0..m).map(|i| n + i).collect(),
            state: (0..cols).map(|j| if j >= n { State::Basic(j - n) } else { State::Lower }).collect(),
            rows,
            dual_tol: 1e-9 * scale,
            iterations: 0,
            max_iterations: 50 * (cols + m) + 10_000,
            degenerate_run: 0,
        };
        for j in 0..n {
            lp.snap(j);
        }
        lp.recompute_basics();
        Ok(lp)
    }

    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lb[j] = lower;
        self.ub[j] = upper;
        if !matches!(self.state[j], State::Basic(_)) {
            self.snap(j);
        }
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lb[j], self.ub[j])
    }

    pub(crate) fn values(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    pub(crate) fn objective(&self) -> f64 {
        self.cost[..self.n].iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * self.cols + j]
    }

    /// Places a nonbasic variable on a bound consistent with its state.
    fn snap(&mut self, j: usize) {
        let (l, u) = (self.lb[j], self.ub[j]);
        let (state, value) = match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if self.state[j] == State::Upper && l < u {
                    (State::Upper, u)
                } else {
                    (State::Lower, l)
                }
            }
            (true, false) => (State::Lower, l),
            (false, true) => (State::Upper, u),
            (false, false) => (State::Free, self.x[j]),
        };
        self.state[j] = state;
        self.x[j] = value;
    }

    fn recompute_basics(&mut self) {
        let nz: Vec<(usize, f64)> = (0..self.cols)
            .filter(|&j| !matches!(self.state[j], State::Basic(_)) && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for i in 0..self.m {
            let row = &self.tab[i * self.cols..(i + 1) * self.cols];
            let v: f64 = nz.iter().map(|&(j, xj)| row[j] * xj).sum();
            self.x[self.basis[i]] = -v;
        }
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[i * self.cols..(i + 1) * self.cols];
            for (dj, t) in self.d.iter_mut().zip(row) {
                *dj -= cb * t;
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    /// Signed bound violation of the basic variable in row `i`: negative when
    /// below its lower bound, positive when above its upper bound.
    fn infeasibility(&self, i: usize) -> f64 {
        let b = self.basis[i];
        let v = self.x[b];
        if v < self.lb[b] - FEAS_TOL {
            v - self.lb[b]
        } else if v > self.ub[b] + FEAS_TOL {
            v - self.ub[b]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        (0..self.m).all(|i| self.infeasibility(i) == 0.0)
    }

    /// Makes boxed nonbasic variables dual feasible by moving them to the
    /// favourable bound; reports whether every nonbasic variable is then
    /// dual feasible.
    fn make_dual_feasible(&mut self) -> bool {
        let mut ok = true;
        let mut moved = false;
        for j in 0..self.cols {
            if self.lb[j] == self.ub[j] {
                continue;
            }
            let dj = self.d[j];
            match self.state[j] {
                State::Basic(_) => {}
                State::Lower if dj < -self.dual_tol => {
                    if self.ub[j].is_finite() {
                        self.state[j] = State::Upper;
                        self.x[j] = self.ub[j];
                        moved = true;
                    } else {
                        ok = false;
                    }
                }
                State::Upper if dj > self.dual_tol => {
                    if self.lb[j].is_finite() {
                        self.state[j] = State::Lower;
                        self.x[j] = self.lb[j];
                        moved = true;
                    } else {
                        ok = false;
                    }
                }
                State::Free if dj.abs() > self.dual_tol => ok = false,
                _ => {}
            }
        }
        if moved {
            self.recompute_basics();
        }
        ok
    }

    fn dual_feasible(&self) -> bool {
        (0..self.cols).all(|j| {
            if self.lb[j] == self.ub[j] {
                return true;
            }
            match self.state[j] {
                State::Basic(_) => true,
                State::Lower => self.d[j] >= -self.dual_tol,
                State::Upper => self.d[j] <= self.dual_tol,
                State::Free => self.d[j].abs() <= self.dual_tol,
            }
        })
    }

    pub(crate) fn solve(&mut self) -> Result<LpStatus> {
        for _attempt in 0..3 {
            for j in 0..self.cols {
                if !matches!(self.state[j], State::Basic(_)) {
                    self.snap(j);
                }
            }
            self.recompute_basics();
            let status = self.solve_from_current()?;
            if status != LpStatus::Optimal {
                return Ok(status);
            }
            if self.accurate() {
                return Ok(status);
            }
            self.reinvert();
        }
        Err(Error::Solver("simplex could not reach an accurate optimum after refactorisation".into()))
    }

    fn solve_from_current(&mut self) -> Result<LpStatus> {
        self.degenerate_run = 0;
        if !self.primal_feasible() && self.make_dual_feasible() && !self.primal_feasible() {
            if !self.dual_simplex()? {
                return Ok(LpStatus::Infeasible);
            }
        }
        if !self.primal_feasible() && !self.phase_one()? {
            return Ok(LpStatus::Infeasible);
        }
        self.phase_two()
    }

    fn tick(&mut self) -> Result<()> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::Solver(format!("simplex iteration limit {} reached", self.max_iterations)));
        }
        Ok(())
    }

    /// Row residuals against the original rows and bound feasibility after a
    /// fresh recomputation of the basic values.
    fn accurate(&mut self) -> bool {
        let before: Vec<f64> = self.basis.iter().map(|&b| self.x[b]).collect();
        self.recompute_basics();
        let drift = self
            .basis
            .iter()
            .zip(&before)
            .map(|(&b, v)| (self.x[b] - v).abs())
            .fold(0.0, f64::max);
        let residual = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let ax: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
                (ax - self.x[self.n + i]).abs() / (1.0 + ax.abs())
            })
            .fold(0.0, f64::max);
        drift < 1e-9 && residual < 1e-9 && self.primal_feasible()
    }

    /// Rebuilds the tableau from the original rows for the current basis.
    fn reinvert(&mut self) {
        let target: Vec<usize> = self.basis.clone();
        let mut in_target = vec![false; self.cols];
        for &b in &target {
            in_target[b] = true;
        }
        let (n, cols) = (self.n, self.cols);
        self.tab.iter_mut().for_each(|t| *t = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                self.tab[i * cols + j] = -a;
            }
            self.tab[i * cols + n + i] = 1.0;
        }
        for j in 0..cols {
            if !matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            self.state[j] = State::Lower;
        }
        self.basis = (0..self.m).map(|i| n + i).collect();
        for i in 0..self.m {
            self.state[n + i] = State::Basic(i);
        }
        for &j in &target {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                if in_target[self.basis[i]] {
                    continue;
                }
                let a = self.at(i, j).abs();
                if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((i, a));
                }
            }
            if let Some((r, _)) = best {
                let leaving = self.basis[r];
                self.pivot(r, j);
                self.basis[r] = j;
                self.state[j] = State::Basic(r);
                self.state[leaving] = State::Lower;
            }
        }
        for j in 0..cols {
            if !matches!(self.state[j], State::Basic(_)) {
                // keep a previous upper placement where possible
                let prefer_upper = self.x[j] == self.ub[j] && self.ub[j].is_finite() && self.lb[j] < self.ub[j];
                self.state[j] = if prefer_upper { State::Upper } else { State::Lower };
                self.snap(j);
            }
        }
        self.recompute_reduced_costs();
        self.recompute_basics();
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.tab[r * cols + q];
        let inv = 1.0 / p;
        let mut nz = Vec::new();
        {
            let row = &mut self.tab[r * cols..(r + 1) * cols];
            for (j, t) in row.iter_mut().enumerate() {
                if *t != 0.0 {
                    *t *= inv;
                    if t.abs() < DROP_TOL {
                        *t = 0.0;
                    } else {
                        nz.push(j);
                    }
                }
            }
            row[q] = 1.0;
        }
        let pivot_row: Vec<(usize, f64)> = nz.iter().map(|&j| (j, self.tab[r * cols + j])).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * cols + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * cols..(i + 1) * cols];
            for &(j, t) in &pivot_row {
                let v = row[j] - f * t;
                row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, t) in &pivot_row {
                self.d[j] -= f * t;
            }
        }
        self.d[q] = 0.0;
    }

    /// Moves nonbasic `q` by `delta` and updates the basic values.
    fn shift(&mut self, q: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        self.x[q] += delta;
        for i in 0..self.m {
            let t = self.at(i, q);
            if t != 0.0 {
                self.x[self.basis[i]] -= t * delta;
            }
        }
    }

    fn enter(&mut self, r: usize, q: usize, leaving_to_upper: bool) {
        let leaving = self.basis[r];
        self.pivot(r, q);
        self.basis[r] = q;
        self.state[q] = State::Basic(r);
        if leaving_to_upper {
            self.state[leaving] = State::Upper;
            self.x[leaving] = self.ub[leaving];
        } else {
            self.state[leaving] = State::Lower;
            self.x[leaving] = self.lb[leaving];
        }
    }

    /// Chooses an entering column from reduced costs `d`; returns the column
    /// and the direction of movement (+1 increase, -1 decrease).
    fn price(&self, d: &[f64], tol: f64) -> Option<(usize, f64)> {
        let bland = self.degenerate_run > DEGENERATE_RUN;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if self.lb[j] == self.ub[j] {
                continue;
            }
            let dj = d[j];
            let dir = match self.state[j] {
                State::Basic(_) => continue,
                State::Lower if dj < -tol => 1.0,
                State::Upper if dj > tol => -1.0,
                State::Free if dj.abs() > tol => -dj.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| dj.abs() > s) {
                best = Some((j, dir, dj.abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Primal ratio test. In phase 1, infeasible basic variables block when
    /// they reach the bound they currently violate.
    fn ratio_test(&self, q: usize, dir: f64, phase_one: bool) -> Ratio {
        let bland = self.degenerate_run > DEGENERATE_RUN;
        let mut theta = f64::INFINITY;
        let mut choice: Option<(usize, bool, f64)> = None;
        if self.lb[q].is_finite() && self.ub[q].is_finite() {
            theta = self.ub[q] - self.lb[q];
        }
        for i in 0..self.m {
            let t = self.at(i, q);
            if t.abs() <= PIVOT_TOL {
                continue;
            }
            let alpha = -t * dir;
            let b = self.basis[i];
            let (v, l, u) = (self.x[b], self.lb[b], self.ub[b]);
            let below = phase_one && v < l - FEAS_TOL;
            let above = phase_one && v > u + FEAS_TOL;
            let (step, to_upper) = if below {
                if alpha > 0.0 {
                    ((l - v) / alpha, false)
                } else {
                    continue;
                }
            } else if above {
                if alpha < 0.0 {
                    ((u - v) / alpha, true)
                } else {
                    continue;
                }
            } else if alpha > 0.0 && u.is_finite() {
                ((u - v) / alpha, true)
            } else if alpha < 0.0 && l.is_finite() {
                ((l - v) / alpha, false)
            } else {
                continue;
            };
            let step = step.max(0.0);
            let better = match choice {
                None => step < theta,
                Some((ci, _, ca)) => {
                    if step < theta - 1e-12 {
                        true
                    } else if step <= theta + 1e-12 {
                        if bland {
                            b < self.basis[ci]
                        } else {
                            alpha.abs() > ca
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = step;
                choice = Some((i, to_upper, alpha.abs()));
            }
        }
        match choice {
            Some((row, to_upper, _)) => Ratio::Pivot { row, theta, to_upper },
            None if theta.is_finite() => Ratio::Flip(theta),
            None => Ratio::Unbounded,
        }
    }

    fn note_step(&mut self, theta: f64) {
        if theta <= 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    fn apply(&mut self, q: usize, dir: f64, ratio: Ratio) {
        match ratio {
            Ratio::Flip(theta) => {
                self.note_step(theta);
                let target = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                let delta = target - self.x[q];
                self.shift(q, delta);
                self.x[q] = target;
                self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
            }
            Ratio::Pivot { row, theta, to_upper } => {
                self.note_step(theta);
                self.shift(q, dir * theta);
                self.enter(row, q, to_upper);
            }
            Ratio::Unbounded => unreachable!("unbounded ratio applied"),
        }
    }

    /// Minimises the sum of bound violations of basic variables. Returns
    /// `false` when the problem is infeasible.
    fn phase_one(&mut self) -> Result<bool> {
        let mut d1 = vec![0.0; self.cols];
        loop {
            let infeas: Vec<(usize, f64)> = (0..self.m)
                .filter_map(|i| {
                    let v = self.infeasibility(i);
                    (v != 0.0).then(|| (i, if v < 0.0 { -1.0 } else { 1.0 }))
                })
                .collect();
            if infeas.is_empty() {
                return Ok(true);
            }
            self.tick()?;
            d1.iter_mut().for_each(|v| *v = 0.0);
            for &(i, c) in &infeas {
                let row = &self.tab[i * self.cols..(i + 1) * self.cols];
                for (dj, t) in d1.iter_mut().zip(row) {
                    *dj -= c * t;
                }
            }
            let Some((q, dir)) = self.price(&d1, 1e-9) else {
                return Ok(false);
            };
            match self.ratio_test(q, dir, true) {
                Ratio::Unbounded => {
                    // An improving direction always reaches some infeasible
                    // row's bound; reaching here means numerical trouble.
                    return Err(Error::Solver("phase 1 found an unbounded improving ray".into()));
                }
                ratio => self.apply(q, dir, ratio),
            }
        }
    }

    fn phase_two(&mut self) -> Result<LpStatus> {
        loop {
            let Some((q, dir)) = self.price(&self.d.clone(), self.dual_tol) else {
                return Ok(LpStatus::Optimal);
            };
            self.tick()?;
            match self.ratio_test(q, dir, false) {
                Ratio::Unbounded => return Ok(LpStatus::Unbounded),
                ratio => self.apply(q, dir, ratio),
            }
        }
    }

    /// Dual simplex from a dual feasible basis. Returns `false` when the
    /// primal is infeasible.
    fn dual_simplex(&mut self) -> Result<bool> {
        loop {
            let bland = self.degenerate_run > DEGENERATE_RUN;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let v = self.infeasibility(i);
                if v == 0.0 {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((li, lv)) => {
                        if bland {
                            self.basis[i] < self.basis[li]
                        } else {
                            v.abs() > lv.abs()
                        }
                    }
                };
                if better {
                    leave = Some((i, v));
                }
            }
            let Some((r, viol)) = leave else {
                return Ok(true);
            };
            if !self.dual_feasible() {
                // lost dual feasibility numerically; let the primal phases finish
                return Ok(true);
            }
            self.tick()?;
            let increase = viol < 0.0;
            let b = self.basis[r];
            let target = if increase { self.lb[b] } else { self.ub[b] };
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..self.cols {
                if self.lb[j] == self.ub[j] {
                    continue;
                }
                let t = self.at(r, j);
                if t.abs() <= PIVOT_TOL {
                    continue;
                }
                let eligible = match self.state[j] {
                    State::Basic(_) => false,
                    State::Lower => (t < 0.0) == increase,
                    State::Upper => (t > 0.0) == increase,
                    State::Free => true,
                };
                if !eligible {
                    continue;
                }
                let ratio = self.d[j].abs() / t.abs();
                let better = match best {
                    None => true,
                    Some((bj, br, bt)) => {
                        if ratio < br - 1e-12 {
                            true
                        } else if ratio <= br + 1e-12 {
                            if bland {
                                j < bj
                            } else {
                                t.abs() > bt
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some((j, ratio, t.abs()));
                }
            }
            let Some((q, ratio, _)) = best else {
                return Ok(false);
            };
            let delta = (target - self.x[b]) / -self.at(r, q);
            self.note_step(ratio);
            self.shift(q, delta);
            self.enter(r, q, !increase);
        }
    }
}
