use std::fmt;

use serde::{Deserialize, Serialize};

use super::{RampMode, UcInstance, UcSolution};

/// Probability-weighted costs of a solution, recomputed from its decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub startup_total: f64,
    pub generation_total: f64,
    pub load_curtail_cost: f64,
    pub total: f64,
    /// Expected cost of each stage, $.
    pub per_stage: Vec<f64>,
    /// Expected unserved energy, GWh.
    pub load_curtail_energy: f64,
    /// Expected discarded wind energy, GWh.
    pub wind_curtail_energy: f64,
}

/// Costs from first principles. A startup is charged whenever a unit is on
/// and was off in the previous stage (or initially), independent of the
/// startup columns of the solution.
pub fn evaluate_solution(instance: &UcInstance, sol: &UcSolution) -> CostBreakdown {
    let k = instance.stages();
    let dt = instance.dt;
    let mut out = CostBreakdown {
        startup_total: 0.0,
        generation_total: 0.0,
        load_curtail_cost: 0.0,
        total: 0.0,
        per_stage: vec![0.0; k],
        load_curtail_energy: 0.0,
        wind_curtail_energy: 0.0,
    };
    for (n, &pi) in instance.probabilities.as_slice().iter().enumerate() {
        for t in 0..k {
            let mut stage = 0.0;
            for (g, gen) in instance.generators.iter().enumerate() {
                let y = sol.commitment[n][g][t];
                let prev = if t == 0 {
                    if instance.initial_commitment[g] {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    sol.commitment[n][g][t - 1]
                };
                let startup = pi * gen.startup_cost * (y - prev).max(0.0);
                let generation = pi * dt * gen.gen_cost * sol.output[n][g][t];
                out.startup_total += startup;
                out.generation_total += generation;
                stage += startup + generation;
            }
            let curtail = pi * instance.voll * dt * sol.load_curtail[n][t];
            out.load_curtail_cost += curtail;
            stage += curtail;
            out.per_stage[t] += stage;
            out.load_curtail_energy += pi * dt * sol.load_curtail[n][t];
            out.wind_curtail_energy += pi * dt * sol.wind_curtail[n][t];
        }
    }
    out.total = out.startup_total + out.generation_total + out.load_curtail_cost;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    PowerBalance,
    GenerationMin,
    GenerationMax,
    Startup,
    RampUp,
    RampDown,
    WindCurtailBound,
    LoadCurtailBound,
    Nonnegativity,
    Integrality,
    NonAnticipativity,
}

/// A violated constraint. Indices are 0-based; `Display` prints them 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: RowKind,
    pub scenario: usize,
    pub stage: usize,
    pub generator: Option<usize>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at n={} t={}", self.kind, self.scenario + 1, self.stage + 1)?;
        if let Some(g) = self.generator {
            write!(f, " g={}", g + 1)?;
        }
        write!(f, " by {:.3e}", self.magnitude)
    }
}

/// Every constraint of the UC model that `sol` violates by more than `tol`.
pub fn check_feasibility(instance: &UcInstance, sol: &UcSolution, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, scenario, stage, generator, magnitude: f64| {
        if magnitude > tol {
            out.push(Violation { kind, scenario, stage, generator, magnitude });
        }
    };
    let dt = instance.dt;
    for n in 0..instance.scenarios() {
        for t in 0..instance.stages() {
            let supply: f64 = (0..instance.generators.len()).map(|g| sol.output[n][g][t]).sum::<f64>()
                + instance.wind[n][t]
                - sol.wind_curtail[n][t];
            let served = instance.demand[t] - sol.load_curtail[n][t];
            push(RowKind::PowerBalance, n, t, None, (supply - served).abs());

            let wc = sol.wind_curtail[n][t];
            let lc = sol.load_curtail[n][t];
            push(RowKind::WindCurtailBound, n, t, None, (wc - instance.wind[n][t]).max(-wc).max(0.0));
            push(RowKind::LoadCurtailBound, n, t, None, (lc - instance.demand[t]).max(-lc).max(0.0));

            for (g, gen) in instance.generators.iter().enumerate() {
                let y = sol.commitment[n][g][t];
                let s = sol.startup[n][g][t];
                let p = sol.output[n][g][t];
                push(RowKind::Integrality, n, t, Some(g), (y - y.round()).abs());
                push(RowKind::Nonnegativity, n, t, Some(g), (-p).max(-s).max(s - 1.0).max(0.0));
                push(RowKind::GenerationMin, n, t, Some(g), (y * gen.p_min - p).max(0.0));
                push(RowKind::GenerationMax, n, t, Some(g), (p - y * gen.p_max).max(0.0));

                let (y_prev, p_prev) = if t == 0 {
                    (if instance.initial_commitment[g] { 1.0 } else { 0.0 }, instance.initial_output[g])
                } else {
                    (sol.commitment[n][g][t - 1], sol.output[n][g][t - 1])
                };
                push(RowKind::Startup, n, t, Some(g), (y - y_prev - s).max(0.0));

                let up = dt * gen.ramp_up;
                let down = dt * gen.ramp_down;
                let delta = p - p_prev;
                let (up_lim, down_lim) = match instance.ramp_mode {
                    RampMode::StartupAware => (
                        up * y_prev + gen.p_min.max(up) * (1.0 - y_prev),
                        down * y + gen.p_min.max(down) * (1.0 - y),
                    ),
                    RampMode::Literal => (up * y_prev, down * y_prev),
                };
                push(RowKind::RampUp, n, t, Some(g), (delta - up_lim).max(0.0));
                push(RowKind::RampDown, n, t, Some(g), (-delta - down_lim).max(0.0));

                if n > 0 && t < instance.nonanticipativity_stages {
                    let dy = (y - sol.commitment[0][g][t]).abs();
                    let dp = (p - sol.output[0][g][t]).abs();
                    push(RowKind::NonAnticipativity, n, t, Some(g), dy.max(dp));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario_tree::ProbabilityVector;
    use crate::uc::{Generator, RampMode, UcInstance};

    fn unit() -> Generator {
        Generator {
            name: "G".into(),
            startup_cost: 4e6,
            p_max: 10.0,
            p_min: 3.0,
            gen_cost: 40_000.0,
            ramp_up: 4.0,
            ramp_down: 4.0,
        }
    }

    fn one_cell(dt: f64, on: bool) -> UcInstance {
        UcInstance {
            generators: vec![unit()],
            dt,
            voll: 300_000.0,
            demand: vec![5.0],
            wind: vec![vec![0.0]],
            probabilities: ProbabilityVector::new(vec![1.0]).unwrap(),
            initial_commitment: vec![on],
            initial_output: vec![if on { 3.0 } else { 0.0 }],
            nonanticipativity_stages: 1,
            ramp_mode: RampMode::StartupAware,
        }
    }

    fn point(y: f64, s: f64, p: f64) -> UcSolution {
        let mut sol = UcSolution::zeros(1, 1, 1);
        sol.commitment[0][0][0] = y;
        sol.startup[0][0][0] = s;
        sol.output[0][0][0] = p;
        sol
    }

    #[test]
    fn zero_solution_costs_nothing() {
        let inst = one_cell(1.0, false);
        let c = evaluate_solution(&inst, &UcSolution::zeros(1, 1, 1));
        assert_eq!(c.total, 0.0);
    }

    #[test]
    fn startup_plus_generation() {
        let inst = one_cell(1.0, false);
        let c = evaluate_solution(&inst, &point(1.0, 1.0, 5.0));
        assert_eq!(c.startup_total, 4_000_000.0);
        assert_eq!(c.generation_total, 200_000.0);
        assert_eq!(c.total, 4_200_000.0);
        assert_eq!(c.per_stage, vec![4_200_000.0]);
    }

    #[test]
    fn load_curtailment_cost_half_hour() {
        let inst = one_cell(0.5, false);
        let mut sol = UcSolution::zeros(1, 1, 1);
        sol.load_curtail[0][0] = 2.0;
        let c = evaluate_solution(&inst, &sol);
        assert_eq!(c.load_curtail_cost, 300_000.0);
        assert_eq!(c.load_curtail_energy, 1.0);
    }

    #[test]
    fn hand_built_point_is_feasible() {
        let inst = one_cell(1.0, true);
        assert!(check_feasibility(&inst, &point(1.0, 0.0, 5.0), 1e-6).is_empty());
    }

    #[test]
    fn balance_shortfall_reported() {
        let inst = one_cell(1.0, true);
        let v = check_feasibility(&inst, &point(1.0, 0.0, 4.9), 1e-6);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, RowKind::PowerBalance);
        assert_eq!((v[0].scenario, v[0].stage), (0, 0));
        assert!((v[0].magnitude - 0.1).abs() < 1e-12);
        assert_eq!(v[0].to_string(), "PowerBalance at n=1 t=1 by 1.000e-1");
    }

    #[test]
    fn below_minimum_output_reported() {
        let mut inst = one_cell(1.0, true);
        inst.demand = vec![2.0];
        let v = check_feasibility(&inst, &point(1.0, 0.0, 2.0), 1e-6);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, RowKind::GenerationMin);
        assert!((v[0].magnitude - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_startup_reported() {
        let inst = one_cell(1.0, false);
        let v = check_feasibility(&inst, &point(1.0, 0.0, 4.0), 1e-6);
        assert!(v.iter().any(|v| v.kind == RowKind::Startup));
    }

    #[test]
    fn literal_ramp_forbids_startup_output() {
        let mut inst = one_cell(1.0, false);
        inst.ramp_mode = RampMode::Literal;
        inst.demand = vec![3.0];
        let v = check_feasibility(&inst, &point(1.0, 1.0, 3.0), 1e-6);
        assert!(v.iter().any(|v| v.kind == RowKind::RampUp), "{v:?}");
        inst.ramp_mode = RampMode::StartupAware;
        assert!(check_feasibility(&inst, &point(1.0, 1.0, 3.0), 1e-6).is_empty());
    }
}
