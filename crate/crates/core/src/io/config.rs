//! TOML configuration in the units of the published test system: startup
//! costs in M$, generation costs in k$/GWh, VOLL in $/GWh. Everything is
//! converted to $ on load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{BackendConfig, RefineOptions};
use crate::error::{Error, Result};
use crate::milp::adapter::ExternalSolver;
use crate::milp::MilpOptions;
use crate::scenario_tree::{ArParams, ErrorMode, ProbabilityVector, QuantileSet, DEFAULT_EPS_C, DEFAULT_PHI, DEFAULT_QUANTILES};
use crate::simulator::{AgentConfig, Mode, ProbabilityRule, SimulationConfig, SolverConfig, SystemState};
use crate::uc::{reference_generators, Generator, RampMode, DEFAULT_VOLL};

pub fn musd_to_usd(x: f64) -> f64 {
    x * 1e6
}

pub fn usd_to_musd(x: f64) -> f64 {
    x / 1e6
}

pub fn kusd_to_usd(x: f64) -> f64 {
    x * 1e3
}

pub fn usd_to_kusd(x: f64) -> f64 {
    x / 1e3
}

/// Energy in GWh of `gw` sustained for `hours`.
pub fn gwh(gw: f64, hours: f64) -> f64 {
    gw * hours
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub dt_hours: f64,
    pub total_steps: usize,
    pub lookahead: usize,
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub nonanticipativity_stages: usize,
    pub ramp_mode: RampMode,
    pub error_mode: ErrorMode,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let c = SimulationConfig::default();
        Self {
            dt_hours: c.dt,
            total_steps: c.total_steps,
            lookahead: c.lookahead,
            mode: c.mode,
            trials: c.trials,
            seed: c.seed,
            nonanticipativity_stages: c.nonanticipativity_stages,
            ramp_mode: c.ramp_mode,
            error_mode: c.error_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeSection {
    pub phi: f64,
    pub eps_c: f64,
    pub quantiles: Vec<f64>,
    pub probability_rule: ProbabilityRule,
    /// Explicit default branch probabilities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
}

impl Default for TreeSection {
    fn default() -> Self {
        Self {
            phi: DEFAULT_PHI,
            eps_c: DEFAULT_EPS_C,
            quantiles: DEFAULT_QUANTILES.to_vec(),
            probability_rule: ProbabilityRule::Fixed,
            probabilities: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub voll_usd_per_gwh: f64,
    pub wind_cap_gw: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { voll_usd_per_gwh: DEFAULT_VOLL, wind_cap_gw: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    pub startup_cost_musd: f64,
    pub p_max_gw: f64,
    pub p_min_gw: f64,
    pub gen_cost_kusd_per_gwh: f64,
    pub ramp_up_gw_per_h: f64,
    /// Same as the ramp-up limit when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_down_gw_per_h: Option<f64>,
}

impl GeneratorEntry {
    pub fn to_generator(&self) -> Generator {
        Generator {
            name: self.name.clone(),
            startup_cost: musd_to_usd(self.startup_cost_musd),
            p_max: self.p_max_gw,
            p_min: self.p_min_gw,
            gen_cost: kusd_to_usd(self.gen_cost_kusd_per_gwh),
            ramp_up: self.ramp_up_gw_per_h,
            ramp_down: self.ramp_down_gw_per_h.unwrap_or(self.ramp_up_gw_per_h),
        }
    }

    pub fn from_generator(g: &Generator) -> Self {
        Self {
            name: g.name.clone(),
            startup_cost_musd: usd_to_musd(g.startup_cost),
            p_max_gw: g.p_max,
            p_min_gw: g.p_min,
            gen_cost_kusd_per_gwh: usd_to_kusd(g.gen_cost),
            ramp_up_gw_per_h: g.ramp_up,
            ramp_down_gw_per_h: Some(g.ramp_down),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub commitment: Vec<bool>,
    pub output_gw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub gap_tol: f64,
    pub int_tol: f64,
    pub node_limit: usize,
    pub time_limit_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalSolver>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = MilpOptions::default();
        Self { gap_tol: o.gap_tol, int_tol: o.int_tol, node_limit: o.node_limit, time_limit_s: o.time_limit, external: None }
    }
}

/// The configuration document. Every section and field is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub simulation: SimulationSection,
    pub scenario_tree: TreeSection,
    pub system: SystemSection,
    /// The three reference units when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    pub solver: SolverSection,
    pub agents: AgentConfigFile,
}

impl ConfigFile {
    pub fn from_config(c: &SimulationConfig) -> Self {
        Self {
            simulation: SimulationSection {
                dt_hours: c.dt,
                total_steps: c.total_steps,
                lookahead: c.lookahead,
                mode: c.mode,
                trials: c.trials,
                seed: c.seed,
                nonanticipativity_stages: c.nonanticipativity_stages,
                ramp_mode: c.ramp_mode,
                error_mode: c.error_mode,
            },
            scenario_tree: TreeSection {
                phi: c.ar.phi,
                eps_c: c.ar.eps_c,
                quantiles: c.quantiles.levels().to_vec(),
                probability_rule: c.probability_rule,
                probabilities: c.default_probabilities.as_ref().map(|p| p.as_slice().to_vec()),
            },
            system: SystemSection { voll_usd_per_gwh: c.voll, wind_cap_gw: c.wind_cap },
            generators: Some(c.generators.iter().map(GeneratorEntry::from_generator).collect()),
            initial: c.initial.as_ref().map(|s| InitialSection { commitment: s.commitment.clone(), output_gw: s.output.clone() }),
            solver: SolverSection {
                gap_tol: c.solver.options.gap_tol,
                int_tol: c.solver.options.int_tol,
                node_limit: c.solver.options.node_limit,
                time_limit_s: c.solver.options.time_limit,
                external: c.solver.external.clone(),
            },
            agents: AgentConfigFile::from_config(&c.agents),
        }
    }

    /// Converts units and checks every invariant.
    pub fn into_config(self) -> Result<SimulationConfig> {
        let t = &self.scenario_tree;
        let ar = ArParams::new(t.phi, t.eps_c).map_err(|e| {
            let field = if !(t.phi > 0.0) || !t.phi.is_finite() { "scenario_tree.phi" } else { "scenario_tree.eps_c" };
            Error::config(field, e.to_string())
        })?;
        let quantiles =
            QuantileSet::new(t.quantiles.clone()).map_err(|e| Error::config("scenario_tree.quantiles", e.to_string()))?;
        let default_probabilities = match &t.probabilities {
            Some(p) => Some(
                ProbabilityVector::new(p.clone()).map_err(|e| Error::config("scenario_tree.probabilities", e.to_string()))?,
            ),
            None => None,
        };
        let generators = match &self.generators {
            Some(list) => list.iter().map(GeneratorEntry::to_generator).collect(),
            None => reference_generators(),
        };
        let s = &self.simulation;
        let cfg = SimulationConfig {
            dt: s.dt_hours,
            total_steps: s.total_steps,
            lookahead: s.lookahead,
            mode: s.mode,
            trials: s.trials,
            seed: s.seed,
            ar,
            quantiles,
            probability_rule: t.probability_rule,
            default_probabilities,
            generators,
            voll: self.system.voll_usd_per_gwh,
            wind_cap: self.system.wind_cap_gw,
            initial: self.initial.map(|i| SystemState { commitment: i.commitment, output: i.output_gw }),
            ramp_mode: s.ramp_mode,
            error_mode: s.error_mode,
            nonanticipativity_stages: s.nonanticipativity_stages,
            solver: SolverConfig {
                options: MilpOptions {
                    gap_tol: self.solver.gap_tol,
                    int_tol: self.solver.int_tol,
                    node_limit: self.solver.node_limit,
                    time_limit: self.solver.time_limit_s,
                },
                external: self.solver.external,
            },
            agents: self.agents.into_config(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let field = e.span().map(|s| key_at(text, s.start)).unwrap_or_default();
        Error::config(if field.is_empty() { "<document>".to_string() } else { field }, e.message().to_string())
    })?;
    file.into_config()
}

/// Dotted key of the line containing byte `offset`, prefixed by its table.
fn key_at(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if offset < pos + line.len() {
            let key = trimmed.split('=').next().unwrap_or("").trim();
            if trimmed.starts_with('[') || key.is_empty() {
                return table;
            }
            return if table.is_empty() { key.to_string() } else { format!("{table}.{key}") };
        }
        pos += line.len();
    }
    table
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// The effective configuration as a loadable document.
pub fn render_config(cfg: &SimulationConfig) -> String {
    toml::to_string_pretty(&ConfigFile::from_config(cfg)).expect("configuration serializes to TOML")
}

pub fn write_config(cfg: &SimulationConfig, path: &Path) -> Result<PathBuf> {
    std::fs::write(path, render_config(cfg)).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfigFile {
    pub max_retries: usize,
    pub sum_tol: f64,
    pub floor: f64,
    pub shrink: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_log: Option<PathBuf>,
    pub backend: BackendConfig,
}

impl Default for AgentConfigFile {
    fn default() -> Self {
        Self::from_config(&AgentConfig::default())
    }
}

impl AgentConfigFile {
    pub fn from_config(a: &AgentConfig) -> Self {
        Self {
            max_retries: a.refine.max_retries,
            sum_tol: a.refine.sum_tol,
            floor: a.refine.floor,
            shrink: a.refine.shrink,
            history_window: a.history_window,
            audit_log: a.audit_log.clone(),
            backend: a.backend.clone(),
        }
    }

    pub fn into_config(self) -> AgentConfig {
        AgentConfig {
            refine: RefineOptions {
                max_retries: self.max_retries,
                sum_tol: self.sum_tol,
                floor: self.floor,
                shrink: self.shrink,
            },
            backend: self.backend,
            history_window: self.history_window,
            audit_log: self.audit_log,
        }
    }
}
