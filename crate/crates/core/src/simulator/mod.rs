//! Rolling-horizon day simulation: per step, build the window and the
//! scenario tree, pick branch probabilities, solve the stochastic UC, commit
//! the first interval, and redispatch it against the actual wind and demand.

mod compare;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agents::{
    compute_error_stats, refine_probabilities, AuditLog, BackendConfig, ChatBackend, NullBackend, Provenance,
    RefineContext, RefineOptions,
};
use crate::error::{Error, Result};
use crate::io::DayData;
use crate::milp::adapter::ExternalSolver;
use crate::milp::{solve_milp, MilpOptions, MilpProblem, MilpSolution};
use crate::scenario_tree::{
    branch_probabilities, build_error_tree, ArParams, ErrorMode, ProbabilityVector, QuantileSet,
};
use crate::uc::{
    build_milp, evaluate_solution, fix_commitments, reference_generators, Generator, RampMode, UcInstance,
    DEFAULT_VOLL,
};

pub use compare::{compare_trials, ComparisonSummary, EnvelopeRow, MetricSummary, TrialTotals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The configured default probabilities at every step.
    #[default]
    Baseline,
    /// Probabilities refined by the chat pipeline at every step.
    Llm,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Baseline => "baseline",
            Mode::Llm => "llm",
        })
    }
}

/// How the default branch probabilities are chosen when none are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityRule {
    /// The fixed five-branch vector for the standard levels, midpoint otherwise.
    #[default]
    Fixed,
    /// Midpoint intervals of the quantile levels.
    Midpoint,
}

/// Unit status entering a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub commitment: Vec<bool>,
    pub output: Vec<f64>,
}

impl SystemState {
    /// Every unit on at its minimum output.
    pub fn all_on_at_minimum(generators: &[Generator]) -> Self {
        Self { commitment: vec![true; generators.len()], output: generators.iter().map(|g| g.p_min).collect() }
    }
}

/// Internal branch and bound, or an external executable via LP files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub options: MilpOptions,
    pub external: Option<ExternalSolver>,
}

impl SolverConfig {
    pub fn solve(&self, problem: &MilpProblem) -> Result<MilpSolution> {
        match &self.external {
            Some(ext) => ext.solve(problem),
            None => solve_milp(problem, &self.options),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub refine: RefineOptions,
    pub backend: BackendConfig,
    /// Most recent realized steps shown to the agents; all when unset.
    pub history_window: Option<usize>,
    pub audit_log: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Hours per step.
    pub dt: f64,
    pub total_steps: usize,
    /// Stages per window.
    pub lookahead: usize,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub ar: ArParams,
    pub quantiles: QuantileSet,
    pub probability_rule: ProbabilityRule,
    /// Overrides `probability_rule` when set.
    pub default_probabilities: Option<ProbabilityVector>,
    pub generators: Vec<Generator>,
    /// $/GWh.
    pub voll: f64,
    /// GW.
    pub wind_cap: f64,
    /// Defaults to every unit on at minimum output.
    pub initial: Option<SystemState>,
    pub ramp_mode: RampMode,
    pub error_mode: ErrorMode,
    pub nonanticipativity_stages: usize,
    pub solver: SolverConfig,
    pub agents: AgentConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt: 0.5,
            total_steps: 48,
            lookahead: 8,
            mode: Mode::Baseline,
            trials: 10,
            seed: 0,
            ar: ArParams::default(),
            quantiles: QuantileSet::default(),
            probability_rule: ProbabilityRule::Fixed,
            default_probabilities: None,
            generators: reference_generators(),
            voll: DEFAULT_VOLL,
            wind_cap: 20.0,
            initial: None,
            ramp_mode: RampMode::StartupAware,
            error_mode: ErrorMode::PerUnit,
            nonanticipativity_stages: 1,
            solver: SolverConfig::default(),
            agents: AgentConfig::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("simulation.dt_hours", format!("must be positive, got {}", self.dt)));
        }
        if self.total_steps < 1 {
            return Err(Error::config("simulation.total_steps", "must be at least 1"));
        }
        if self.lookahead < 1 {
            return Err(Error::config("simulation.lookahead", "must be at least 1"));
        }
        if self.trials < 1 {
            return Err(Error::config("simulation.trials", "must be at least 1"));
        }
        if self.nonanticipativity_stages < 1 {
            return Err(Error::config("simulation.nonanticipativity_stages", "must be at least 1"));
        }
        if self.generators.is_empty() {
            return Err(Error::config("generators", "at least one generator is required"));
        }
        for g in &self.generators {
            g.validate()?;
        }
        if !(self.voll >= 0.0 && self.voll.is_finite()) {
            return Err(Error::config("system.voll", format!("must be non-negative, got {}", self.voll)));
        }
        if !(self.wind_cap >= 0.0 && self.wind_cap.is_finite()) {
            return Err(Error::config("system.wind_cap_gw", format!("must be non-negative, got {}", self.wind_cap)));
        }
        if let Some(p) = &self.default_probabilities {
            if p.len() != self.quantiles.len() {
                return Err(Error::config(
                    "scenario_tree.probabilities",
                    format!("{} entries for {} quantiles", p.len(), self.quantiles.len()),
                ));
            }
        }
        if let Some(s) = &self.initial {
            let g = self.generators.len();
            if s.commitment.len() != g || s.output.len() != g {
                return Err(Error::config("initial", format!("expected {g} entries per field")));
            }
            for (i, gen) in self.generators.iter().enumerate() {
                let p = s.output[i];
                if !(p >= 0.0 && p <= gen.p_max) || (!s.commitment[i] && p != 0.0) {
                    return Err(Error::config(
                        format!("initial.output_gw[{i}]"),
                        format!("{p} is not a valid output for {} in its initial status", gen.name),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn baseline_probabilities(&self) -> ProbabilityVector {
        match (&self.default_probabilities, self.probability_rule) {
            (Some(p), _) => p.clone(),
            (None, ProbabilityRule::Fixed) => ProbabilityVector::default_for(&self.quantiles),
            (None, ProbabilityRule::Midpoint) => branch_probabilities(&self.quantiles),
        }
    }

    pub fn initial_state(&self) -> SystemState {
        self.initial.clone().unwrap_or_else(|| SystemState::all_on_at_minimum(&self.generators))
    }
}

/// Demand and wind over one rolling window. Entry 0 holds actuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub demand: Vec<f64>,
    pub wind: Vec<f64>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }
}

/// The window starting at `step`: actual demand and wind first, forecasts
/// after, truncated at the end of the data.
pub fn assemble_window(data: &DayData, step: usize, cfg: &SimulationConfig) -> Result<Window> {
    let n = data.len();
    if step >= n {
        return Err(Error::domain(format!("step {step} is outside the {n}-step day")));
    }
    let len = cfg.lookahead.min(n - step);
    let mut demand = Vec::with_capacity(len);
    let mut wind = Vec::with_capacity(len);
    for k in 0..len {
        let t = step + k;
        if k == 0 {
            demand.push(data.demand_actual[t]);
            wind.push(data.wind_actual[t].clamp(0.0, cfg.wind_cap));
        } else {
            demand.push(data.demand_forecast[t]);
            wind.push(data.wind_forecast[t].clamp(0.0, cfg.wind_cap));
        }
    }
    Ok(Window { demand, wind })
}

/// Realized outcome of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub initial_commitment: Vec<bool>,
    pub initial_output: Vec<f64>,
    pub commitment: Vec<bool>,
    /// GW per generator.
    pub output: Vec<f64>,
    /// Available wind, GW.
    pub wind: f64,
    pub demand: f64,
    pub load_curtail: f64,
    pub wind_curtail: f64,
    /// Realized $ for this interval.
    pub cost: f64,
    pub startup_cost: f64,
    pub generation_cost: f64,
    pub load_curtail_cost: f64,
    /// Expected $ over the window reported by the MILP.
    pub planned_objective: f64,
    pub probabilities: Vec<f64>,
    pub provenance: Provenance,
    pub nodes: usize,
    /// Wall time of the window MILP; left out of serialized reports.
    #[serde(skip)]
    pub solve_seconds: f64,
}

/// Windowed MILP, first-interval commitment, and redispatch against actuals.
pub fn run_step(
    step: usize,
    state: &SystemState,
    window: &Window,
    probs: &ProbabilityVector,
    provenance: Provenance,
    cfg: &SimulationConfig,
) -> Result<(StepRecord, SystemState)> {
    let k = window.len();
    if k == 0 || window.wind.len() != k {
        return Err(Error::domain("window must have matching, non-empty demand and wind"));
    }
    let tree = build_error_tree(&cfg.quantiles, cfg.ar, k)?;
    let wind = tree.apply_errors(&window.wind, cfg.wind_cap, cfg.error_mode)?;
    let instance = UcInstance {
        generators: cfg.generators.clone(),
        dt: cfg.dt,
        voll: cfg.voll,
        demand: window.demand.clone(),
        wind,
        probabilities: probs.clone(),
        initial_commitment: state.commitment.clone(),
        initial_output: state.output.clone(),
        nonanticipativity_stages: cfg.nonanticipativity_stages.min(k),
        ramp_mode: cfg.ramp_mode,
    };
    let (problem, index) = build_milp(&instance)?;
    let started = Instant::now();
    let solution = cfg.solver.solve(&problem)?;
    let solve_seconds = started.elapsed().as_secs_f64();
    if solution.values.is_empty() {
        return Err(Error::Solver(format!(
            "step {step}: window MILP ended {} without a solution; instance: {}",
            solution.status.as_str(),
            serde_json::to_string(&instance).unwrap_or_default()
        )));
    }
    let plan = index.decode(&solution.values, solution.objective);
    let commitment: Vec<bool> = (0..cfg.generators.len()).map(|g| plan.commitment[0][g][0] > 0.5).collect();

    let realized = realize(state, window.demand[0], window.wind[0], &commitment, cfg)?;
    let record = StepRecord {
        step,
        initial_commitment: state.commitment.clone(),
        initial_output: state.output.clone(),
        commitment: commitment.clone(),
        output: realized.output.clone(),
        wind: window.wind[0],
        demand: window.demand[0],
        load_curtail: realized.load_curtail,
        wind_curtail: realized.wind_curtail,
        cost: realized.startup_cost + realized.generation_cost + realized.load_curtail_cost,
        startup_cost: realized.startup_cost,
        generation_cost: realized.generation_cost,
        load_curtail_cost: realized.load_curtail_cost,
        planned_objective: solution.objective,
        probabilities: probs.as_slice().to_vec(),
        provenance,
        nodes: solution.nodes_explored,
        solve_seconds,
    };
    Ok((record, SystemState { commitment, output: realized.output }))
}

struct Realized {
    output: Vec<f64>,
    load_curtail: f64,
    wind_curtail: f64,
    startup_cost: f64,
    generation_cost: f64,
    load_curtail_cost: f64,
}

/// Single-interval dispatch with commitments fixed, against actual data.
fn realize(state: &SystemState, demand: f64, wind: f64, commitment: &[bool], cfg: &SimulationConfig) -> Result<Realized> {
    let instance = UcInstance {
        generators: cfg.generators.clone(),
        dt: cfg.dt,
        voll: cfg.voll,
        demand: vec![demand],
        wind: vec![vec![wind]],
        probabilities: ProbabilityVector::unit(1, 0),
        initial_commitment: state.commitment.clone(),
        initial_output: state.output.clone(),
        nonanticipativity_stages: 1,
        ramp_mode: cfg.ramp_mode,
    };
    let (mut problem, index) = build_milp(&instance)?;
    let fixed: Vec<Vec<bool>> = commitment.iter().map(|&on| vec![on]).collect();
    fix_commitments(&mut problem, &index, &fixed);
    let solution = solve_milp(&problem, &cfg.solver.options)?;
    if solution.values.is_empty() {
        return Err(Error::Solver(format!(
            "redispatch ended {} without a solution; instance: {}",
            solution.status.as_str(),
            serde_json::to_string(&instance).unwrap_or_default()
        )));
    }
    let sol = index.decode(&solution.values, solution.objective);
    let costs = evaluate_solution(&instance, &sol);
    Ok(Realized {
        output: (0..cfg.generators.len()).map(|g| sol.output[0][g][0]).collect(),
        load_curtail: sol.load_curtail[0][0],
        wind_curtail: sol.wind_curtail[0][0],
        startup_cost: costs.startup_total,
        generation_cost: costs.generation_total,
        load_curtail_cost: costs.load_curtail_cost,
    })
}

/// Day totals. Costs in $, energies in GWh.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Totals {
    pub cost: f64,
    pub load_curtail_gwh: f64,
    pub wind_curtail_gwh: f64,
}

impl Totals {
    pub fn from_steps(steps: &[StepRecord], dt: f64) -> Self {
        let mut t = Totals::default();
        for s in steps {
            t.cost += s.cost;
            t.load_curtail_gwh += s.load_curtail * dt;
            t.wind_curtail_gwh += s.wind_curtail * dt;
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub mode: Mode,
    pub trial: Option<usize>,
    pub seed: u64,
    pub dt: f64,
    pub steps: Vec<StepRecord>,
    pub totals: Totals,
}

impl SimulationReport {
    pub fn count(&self, provenance: Provenance) -> usize {
        self.steps.iter().filter(|s| s.provenance == provenance).count()
    }
}

/// Error statistics and `(actual, forecast)` wind pairs up to and including
/// `step`, limited to the configured history window.
pub fn realized_history(data: &DayData, step: usize, cfg: &SimulationConfig) -> (Vec<f64>, Vec<f64>) {
    let end = step + 1;
    let start = cfg.agents.history_window.map_or(0, |w| end.saturating_sub(w.max(1)));
    let clamp = |x: f64| x.clamp(0.0, cfg.wind_cap);
    let actual = data.wind_actual[start..end].iter().map(|&x| clamp(x)).collect();
    let forecast = data.wind_forecast[start..end].iter().map(|&x| clamp(x)).collect();
    (actual, forecast)
}

/// Simulates `cfg.total_steps` steps. In llm mode a missing backend behaves
/// like one that always fails.
pub fn run_simulation(
    cfg: &SimulationConfig,
    data: &DayData,
    backend: Option<&mut dyn ChatBackend>,
    audit: &mut AuditLog,
) -> Result<SimulationReport> {
    cfg.validate()?;
    if data.len() < cfg.total_steps {
        return Err(Error::domain(format!(
            "day data has {} steps but the simulation needs {}",
            data.len(),
            cfg.total_steps
        )));
    }
    let mut null = NullBackend;
    let backend: &mut dyn ChatBackend = match backend {
        Some(b) => b,
        None => &mut null,
    };
    let defaults = cfg.baseline_probabilities();
    let mut state = cfg.initial_state();
    let mut steps = Vec::with_capacity(cfg.total_steps);
    for step in 0..cfg.total_steps {
        let window = assemble_window(data, step, cfg)?;
        let (probs, provenance) = match cfg.mode {
            Mode::Baseline => (defaults.clone(), Provenance::Default),
            Mode::Llm => {
                let (actual, forecast) = realized_history(data, step, cfg);
                let ctx = RefineContext {
                    stats: compute_error_stats(&actual, &forecast)?,
                    history: actual.into_iter().zip(forecast).collect(),
                    quantiles: cfg.quantiles.clone(),
                    defaults: defaults.clone(),
                    step: Some(step),
                };
                let r = refine_probabilities(backend, &ctx, &cfg.agents.refine, audit);
                (r.probabilities, r.provenance)
            }
        };
        let (record, next) = run_step(step, &state, &window, &probs, provenance, cfg)?;
        state = next;
        steps.push(record);
    }
    let totals = Totals::from_steps(&steps, cfg.dt);
    Ok(SimulationReport { mode: cfg.mode, trial: None, seed: cfg.seed, dt: cfg.dt, steps, totals })
}

/// Seed for trial `trial`'s backend session.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
