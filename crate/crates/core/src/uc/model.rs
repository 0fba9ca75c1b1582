use serde::{Deserialize, Serialize};

use super::{RampMode, UcInstance, UcSolution};
use crate::error::Result;
use crate::milp::{Comparator, MilpProblem};

/// Column layout of the UC MILP.
///
/// For every scenario, stage and generator the columns `y, s, P` are
/// contiguous; the per-scenario, per-stage wind and load curtailment columns
/// follow all generator columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarIndex {
    pub scenarios: usize,
    pub generators: usize,
    pub stages: usize,
}

impl VarIndex {
    fn gen_base(&self, n: usize, g: usize, t: usize) -> usize {
        3 * ((n * self.stages + t) * self.generators + g)
    }

    pub fn y(&self, n: usize, g: usize, t: usize) -> usize {
        self.gen_base(n, g, t)
    }

    pub fn s(&self, n: usize, g: usize, t: usize) -> usize {
        self.gen_base(n, g, t) + 1
    }

    pub fn p(&self, n: usize, g: usize, t: usize) -> usize {
        self.gen_base(n, g, t) + 2
    }

    fn curtail_base(&self) -> usize {
        3 * self.scenarios * self.stages * self.generators
    }

    pub fn wind_curtail(&self, n: usize, t: usize) -> usize {
        self.curtail_base() + 2 * (n * self.stages + t)
    }

    pub fn load_curtail(&self, n: usize, t: usize) -> usize {
        self.wind_curtail(n, t) + 1
    }

    pub fn num_vars(&self) -> usize {
        self.curtail_base() + 2 * self.scenarios * self.stages
    }

    /// Splits a solver vector back into domain arrays. Round-off below 1e-12
    /// (including negative zero) is reported as zero.
    pub fn decode(&self, values: &[f64], objective: f64) -> UcSolution {
        let values: Vec<f64> = values.iter().map(|&x| if x.abs() < 1e-12 { 0.0 } else { x }).collect();
        let mut sol = UcSolution::zeros(self.scenarios, self.generators, self.stages);
        for n in 0..self.scenarios {
            for t in 0..self.stages {
                for g in 0..self.generators {
                    sol.commitment[n][g][t] = values[self.y(n, g, t)].round();
                    sol.startup[n][g][t] = values[self.s(n, g, t)];
                    sol.output[n][g][t] = values[self.p(n, g, t)];
                }
                sol.wind_curtail[n][t] = values[self.wind_curtail(n, t)];
                sol.load_curtail[n][t] = values[self.load_curtail(n, t)];
            }
        }
        sol.objective = objective;
        sol
    }
}

/// Builds the expected-cost MILP for `instance`.
pub fn build_milp(instance: &UcInstance) -> Result<(MilpProblem, VarIndex)> {
    instance.validate()?;
    let idx = VarIndex {
        scenarios: instance.scenarios(),
        generators: instance.generators.len(),
        stages: instance.stages(),
    };
    let dt = instance.dt;
    let probs = instance.probabilities.as_slice();
    let mut p = MilpProblem::new();

    for (n, &pi) in probs.iter().enumerate() {
        for t in 0..idx.stages {
            for (g, gen) in instance.generators.iter().enumerate() {
                let tag = format!("n{}_g{}_t{}", n + 1, g + 1, t + 1);
                p.add_binary(format!("y_{tag}"), 0.0);
                p.add_continuous(format!("s_{tag}"), 0.0, 1.0, pi * gen.startup_cost);
                p.add_continuous(format!("P_{tag}"), 0.0, gen.p_max, pi * dt * gen.gen_cost);
            }
        }
    }
    for (n, &pi) in probs.iter().enumerate() {
        for t in 0..idx.stages {
            let tag = format!("n{}_t{}", n + 1, t + 1);
            p.add_continuous(format!("wcur_{tag}"), 0.0, instance.wind[n][t], 0.0);
            p.add_continuous(format!("lcur_{tag}"), 0.0, instance.demand[t], pi * instance.voll * dt);
        }
    }
    debug_assert_eq!(p.num_vars(), idx.num_vars());

    for n in 0..idx.scenarios {
        for t in 0..idx.stages {
            let tag = format!("n{}_t{}", n + 1, t + 1);
            let mut row: Vec<(usize, f64)> = (0..idx.generators).map(|g| (idx.p(n, g, t), 1.0)).collect();
            row.push((idx.wind_curtail(n, t), -1.0));
            row.push((idx.load_curtail(n, t), 1.0));
            p.add_constraint(format!("balance_{tag}"), row, Comparator::Eq, instance.demand[t] - instance.wind[n][t]);
        }
    }

    for n in 0..idx.scenarios {
        for (g, gen) in instance.generators.iter().enumerate() {
            let y0 = if instance.initial_commitment[g] { 1.0 } else { 0.0 };
            let p0 = instance.initial_output[g];
            let up_step = dt * gen.ramp_up;
            let down_step = dt * gen.ramp_down;
            let up_jump = gen.p_min.max(up_step);
            let down_jump = gen.p_min.max(down_step);
            for t in 0..idx.stages {
                let tag = format!("n{}_g{}_t{}", n + 1, g + 1, t + 1);
                let (y, s, pt) = (idx.y(n, g, t), idx.s(n, g, t), idx.p(n, g, t));
                p.add_constraint(format!("genmin_{tag}"), vec![(pt, 1.0), (y, -gen.p_min)], Comparator::Ge, 0.0);
                p.add_constraint(format!("genmax_{tag}"), vec![(pt, 1.0), (y, -gen.p_max)], Comparator::Le, 0.0);

                // s >= y(t) - y(t-1)
                if t == 0 {
                    p.add_constraint(format!("startup_{tag}"), vec![(s, 1.0), (y, -1.0)], Comparator::Ge, -y0);
                } else {
                    let yp = idx.y(n, g, t - 1);
                    p.add_constraint(format!("startup_{tag}"), vec![(s, 1.0), (y, -1.0), (yp, 1.0)], Comparator::Ge, 0.0);
                }

                // previous output/commitment: variables, or constants at t = 0
                let prev = (t > 0).then(|| (idx.p(n, g, t - 1), idx.y(n, g, t - 1)));
                match instance.ramp_mode {
                    RampMode::StartupAware => {
                        // P(t) - P(t-1) <= up*y(t-1) + jump_up*(1 - y(t-1))
                        // P(t-1) - P(t) <= down*y(t) + jump_down*(1 - y(t))
                        match prev {
                            Some((pp, yp)) => {
                                p.add_constraint(
                                    format!("rampup_{tag}"),
                                    vec![(pt, 1.0), (pp, -1.0), (yp, up_jump - up_step)],
                                    Comparator::Le,
                                    up_jump,
                                );
                                p.add_constraint(
                                    format!("rampdown_{tag}"),
                                    vec![(pp, 1.0), (pt, -1.0), (y, down_jump - down_step)],
                                    Comparator::Le,
                                    down_jump,
                                );
                            }
                            None => {
                                p.add_constraint(
                                    format!("rampup_{tag}"),
                                    vec![(pt, 1.0)],
                                    Comparator::Le,
                                    p0 + up_step * y0 + up_jump * (1.0 - y0),
                                );
                                p.add_constraint(
                                    format!("rampdown_{tag}"),
                                    vec![(pt, -1.0), (y, down_jump - down_step)],
                                    Comparator::Le,
                                    down_jump - p0,
                                );
                            }
                        }
                    }
                    RampMode::Literal => match prev {
                        Some((pp, yp)) => {
                            p.add_constraint(
                                format!("rampup_{tag}"),
                                vec![(pt, 1.0), (pp, -1.0), (yp, -up_step)],
                                Comparator::Le,
                                0.0,
                            );
                            p.add_constraint(
                                format!("rampdown_{tag}"),
                                vec![(pt, 1.0), (pp, -1.0), (yp, down_step)],
                                Comparator::Ge,
                                0.0,
                            );
                        }
                        None => {
                            p.add_constraint(format!("rampup_{tag}"), vec![(pt, 1.0)], Comparator::Le, p0 + up_step * y0);
                            p.add_constraint(format!("rampdown_{tag}"), vec![(pt, 1.0)], Comparator::Ge, p0 - down_step * y0);
                        }
                    },
                }
            }
        }
    }

    for t in 0..instance.nonanticipativity_stages {
        for n in 1..idx.scenarios {
            for g in 0..idx.generators {
                let tag = format!("n{}_g{}_t{}", n + 1, g + 1, t + 1);
                p.add_constraint(format!("na_y_{tag}"), vec![(idx.y(n, g, t), 1.0), (idx.y(0, g, t), -1.0)], Comparator::Eq, 0.0);
                p.add_constraint(format!("na_p_{tag}"), vec![(idx.p(n, g, t), 1.0), (idx.p(0, g, t), -1.0)], Comparator::Eq, 0.0);
            }
        }
    }
    Ok((p, idx))
}

/// Pins every scenario's commitment at every stage to `commitment[g][t]`.
pub fn fix_commitments(problem: &mut MilpProblem, idx: &VarIndex, commitment: &[Vec<bool>]) {
    for n in 0..idx.scenarios {
        for (g, row) in commitment.iter().enumerate() {
            for (t, &on) in row.iter().enumerate() {
                let v = &mut problem.vars[idx.y(n, g, t)];
                let val = if on { 1.0 } else { 0.0 };
                v.lower = val;
                v.upper = val;
            }
        }
    }
}
