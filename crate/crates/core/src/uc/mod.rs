//! Multi-scenario unit commitment: domain types, MILP formulation, and
//! solver-independent cost evaluation and feasibility checking.

mod evaluate;
mod model;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario_tree::ProbabilityVector;

pub use evaluate::{check_feasibility, evaluate_solution, CostBreakdown, RowKind, Violation};
pub use model::{build_milp, fix_commitments, VarIndex};

/// A thermal unit. Costs are in $ and $/GWh, power in GW, ramps in GW/h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub startup_cost: f64,
    pub p_max: f64,
    pub p_min: f64,
    pub gen_cost: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
}

impl Generator {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config(format!("generators.{}.{field}", self.name), msg));
        if !(self.p_max >= 0.0) {
            return bad("p_max", format!("must be non-negative, got {}", self.p_max));
        }
        if !(self.p_min >= 0.0 && self.p_min <= self.p_max) {
            return bad("p_min", format!("must lie in [0, p_max = {}], got {}", self.p_max, self.p_min));
        }
        if !(self.startup_cost >= 0.0) {
            return bad("startup_cost", format!("must be non-negative, got {}", self.startup_cost));
        }
        if !(self.gen_cost >= 0.0) {
            return bad("gen_cost", format!("must be non-negative, got {}", self.gen_cost));
        }
        if !(self.ramp_up > 0.0) {
            return bad("ramp_up", format!("must be positive, got {}", self.ramp_up));
        }
        if !(self.ramp_down > 0.0) {
            return bad("ramp_down", format!("must be positive, got {}", self.ramp_down));
        }
        Ok(())
    }
}

/// The three-unit test system: startup 4/2/4 M$, 10/12/15 GW capacity,
/// 3/2/0 GW minimum output, 40/60/120 k$/GWh and 4/4/6 GW/h ramps.
pub fn reference_generators() -> Vec<Generator> {
    [(4.0, 10.0, 3.0, 40.0, 4.0), (2.0, 12.0, 2.0, 60.0, 4.0), (4.0, 15.0, 0.0, 120.0, 6.0)]
        .iter()
        .enumerate()
        .map(|(i, &(st, pmax, pmin, cost, ramp))| Generator {
            name: format!("G{}", i + 1),
            startup_cost: st * 1e6,
            p_max: pmax,
            p_min: pmin,
            gen_cost: cost * 1e3,
            ramp_up: ramp,
            ramp_down: ramp,
        })
        .collect()
}

/// Value of lost load in $/GWh.
pub const DEFAULT_VOLL: f64 = 300_000.0;

/// How ramp limits treat units that are switching on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RampMode {
    /// A unit that was off may jump to `max(p_min, dt*RU)`; a unit switching
    /// off may drop from `max(p_min, dt*RD)`.
    #[default]
    StartupAware,
    /// `-dt*RD*y(t-1) <= P(t) - P(t-1) <= dt*RU*y(t-1)`: an offline unit
    /// cannot change output at all.
    Literal,
}

/// One rolling-window stochastic unit-commitment problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcInstance {
    pub generators: Vec<Generator>,
    /// Step length in hours.
    pub dt: f64,
    /// $/GWh of unserved demand.
    pub voll: f64,
    /// GW per stage, shared by every scenario.
    pub demand: Vec<f64>,
    /// Available wind, `[scenario][stage]` GW.
    pub wind: Vec<Vec<f64>>,
    pub probabilities: ProbabilityVector,
    pub initial_commitment: Vec<bool>,
    pub initial_output: Vec<f64>,
    /// Leading stages whose decisions are shared by every scenario.
    pub nonanticipativity_stages: usize,
    pub ramp_mode: RampMode,
}

impl UcInstance {
    pub fn stages(&self) -> usize {
        self.demand.len()
    }

    pub fn scenarios(&self) -> usize {
        self.wind.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.stages();
        if k == 0 {
            return Err(Error::domain("instance has no stages"));
        }
        if self.wind.is_empty() {
            return Err(Error::domain("instance has no scenarios"));
        }
        if self.probabilities.len() != self.scenarios() {
            return Err(Error::domain(format!(
                "{} probabilities for {} scenarios",
                self.probabilities.len(),
                self.scenarios()
            )));
        }
        // re-check in case the vector was built without validation
        ProbabilityVector::new(self.probabilities.as_slice().to_vec())?;
        for (n, row) in self.wind.iter().enumerate() {
            if row.len() != k {
                return Err(Error::domain(format!("wind scenario {n} has {} stages, expected {k}", row.len())));
            }
            if row.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                return Err(Error::domain(format!("wind scenario {n} has a negative or non-finite value")));
            }
        }
        if self.demand.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::domain("demand has a negative or non-finite value"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.voll >= 0.0) {
            return Err(Error::domain(format!("VOLL must be non-negative, got {}", self.voll)));
        }
        let g = self.generators.len();
        if self.initial_commitment.len() != g || self.initial_output.len() != g {
            return Err(Error::domain("initial state length does not match the generator count"));
        }
        for (i, gen) in self.generators.iter().enumerate() {
            gen.validate().map_err(|e| Error::domain(e.to_string()))?;
            let p0 = self.initial_output[i];
            if !(p0 >= 0.0 && p0 <= gen.p_max) {
                return Err(Error::domain(format!("initial output {p0} of {} is outside [0, p_max]", gen.name)));
            }
            if !self.initial_commitment[i] && p0 != 0.0 {
                return Err(Error::domain(format!("{} is initially off but has output {p0}", gen.name)));
            }
        }
        if self.nonanticipativity_stages < 1 || self.nonanticipativity_stages > k {
            return Err(Error::domain(format!(
                "non-anticipativity stages must be in 1..={k}, got {}",
                self.nonanticipativity_stages
            )));
        }
        Ok(())
    }
}

/// Decoded decisions, indexed `[scenario][generator][stage]` and
/// `[scenario][stage]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcSolution {
    pub commitment: Vec<Vec<Vec<f64>>>,
    pub startup: Vec<Vec<Vec<f64>>>,
    pub output: Vec<Vec<Vec<f64>>>,
    pub wind_curtail: Vec<Vec<f64>>,
    pub load_curtail: Vec<Vec<f64>>,
    /// Expected cost in $ as reported by whoever produced the solution.
    pub objective: f64,
}

impl UcSolution {
    pub fn zeros(scenarios: usize, generators: usize, stages: usize) -> Self {
        let cube = vec![vec![vec![0.0; stages]; generators]; scenarios];
        Self {
            commitment: cube.clone(),
            startup: cube.clone(),
            output: cube,
            wind_curtail: vec![vec![0.0; stages]; scenarios],
            load_curtail: vec![vec![0.0; stages]; scenarios],
            objective: 0.0,
        }
    }
}
