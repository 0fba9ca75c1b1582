use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario_tree::{ProbabilityVector, QuantileSet};

use super::backend::{ChatBackend, ChatMessage};
use super::calibration::{deterministic_calibration, DEFAULT_FLOOR, DEFAULT_SHRINK};
use super::extract::{parse_agent2_reply, ExtractError, TRIGGER_PHRASE};
use super::prompt::{build_agent1_prompt, build_agent2_prompt};
use super::{validate_probability_vector, ErrorStats, Provenance, DEFAULT_SUM_TOL};

const AGENT1_SYSTEM: &str = "You are a power system analyst specialising in wind forecast uncertainty.";
const AGENT2_SYSTEM: &str = "You extract values from text and reply only in the requested format.";

/// Everything the pipeline sees at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineContext {
    pub stats: ErrorStats,
    /// `(actual, forecast)` wind pairs in GW.
    pub history: Vec<(f64, f64)>,
    pub quantiles: QuantileSet,
    pub defaults: ProbabilityVector,
    /// Step index recorded in the audit log.
    pub step: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineOptions {
    /// Further attempts after the first failed one.
    pub max_retries: usize,
    pub sum_tol: f64,
    pub floor: f64,
    pub shrink: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { max_retries: 2, sum_tol: DEFAULT_SUM_TOL, floor: DEFAULT_FLOOR, shrink: DEFAULT_SHRINK }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Request,
    Response,
    Outcome,
}

/// One line of the audit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub trial: Option<usize>,
    pub step: Option<usize>,
    /// 1-based attempt number within the step.
    pub exchange: usize,
    /// 1 or 2 for agent traffic, 0 for the outcome line.
    pub agent: u8,
    pub direction: Direction,
    pub payload: String,
}

/// Append-only record of every prompt, reply and outcome, optionally
/// mirrored to a JSON-lines file.
#[derive(Debug, Default)]
pub struct AuditLog {
    /// Stamped on every record appended from now on.
    pub trial: Option<usize>,
    records: Vec<AuditRecord>,
    file: Option<File>,
    write_error: Option<String>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends to `path`, creating it if needed.
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { file: Some(file), ..Self::default() })
    }

    pub fn append(&mut self, mut record: AuditRecord) {
        record.trial = self.trial;
        if let Some(f) = &mut self.file {
            let line = serde_json::to_string(&record).expect("audit record serializes");
            if let Err(e) = writeln!(f, "{line}") {
                self.write_error.get_or_insert(e.to_string());
            }
        }
        self.records.push(record);
    }

    pub fn records(&self) -> &[AuditRecord] {
        &self.records
    }

    /// Distinct `(trial, step, exchange)` keys.
    pub fn exchanges(&self) -> usize {
        let mut keys: Vec<_> = self.records.iter().map(|r| (r.trial, r.step, r.exchange)).collect();
        keys.dedup();
        keys.sort();
        keys.dedup();
        keys.len()
    }

    /// First failure to write the mirror file, if any.
    pub fn write_error(&self) -> Option<&str> {
        self.write_error.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub probabilities: ProbabilityVector,
    pub provenance: Provenance,
    /// Attempts made, successful or not.
    pub attempts: usize,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

#[derive(Debug, thiserror::Error)]
enum AttemptError {
    #[error("agent {0} request failed: {1}")]
    Backend(u8, super::BackendError),
    #[error("analysis reply lacks \"{TRIGGER_PHRASE}\"")]
    NoTrigger,
    #[error("extraction failed: {0}")]
    Extract(ExtractError),
    #[error("rejected: {0}")]
    Invalid(super::ValidationError),
}

/// Runs the two-agent pipeline, retrying up to `max_retries` times, and
/// falls back to [`deterministic_calibration`] when every attempt fails.
pub fn refine_probabilities(
    backend: &mut dyn ChatBackend,
    ctx: &RefineContext,
    options: &RefineOptions,
    audit: &mut AuditLog,
) -> Refinement {
    let n = ctx.quantiles.len();
    let prompt1 = build_agent1_prompt(&ctx.stats, &ctx.quantiles, &ctx.defaults, &ctx.history);
    let attempts = options.max_retries + 1;
    for exchange in 1..=attempts {
        let mut log = |agent: u8, direction: Direction, payload: String| {
            audit.append(AuditRecord { timestamp_ms: now_ms(), trial: None, step: ctx.step, exchange, agent, direction, payload })
        };
        let result = (|| {
            log(1, Direction::Request, prompt1.clone());
            let reply1 = backend
                .send(&[ChatMessage::system(AGENT1_SYSTEM), ChatMessage::user(prompt1.clone())])
                .map_err(|e| AttemptError::Backend(1, e))?;
            log(1, Direction::Response, reply1.clone());
            if !reply1.to_ascii_lowercase().replace("\\_", "_").contains(TRIGGER_PHRASE) {
                return Err(AttemptError::NoTrigger);
            }
            let prompt2 = build_agent2_prompt(&reply1, n);
            log(2, Direction::Request, prompt2.clone());
            let reply2 = backend
                .send(&[ChatMessage::system(AGENT2_SYSTEM), ChatMessage::user(prompt2)])
                .map_err(|e| AttemptError::Backend(2, e))?;
            log(2, Direction::Response, reply2.clone());
            let raw = parse_agent2_reply(&reply2, n).map_err(AttemptError::Extract)?;
            validate_probability_vector(&raw, n, options.sum_tol).map_err(AttemptError::Invalid)
        })();
        match result {
            Ok(p) => {
                log(0, Direction::Outcome, format!("accepted {p}"));
                return Refinement { probabilities: p, provenance: Provenance::Llm, attempts: exchange };
            }
            Err(e) => log(0, Direction::Outcome, e.to_string()),
        }
    }
    let p = deterministic_calibration(&ctx.stats, &ctx.quantiles, &ctx.defaults, options.floor, options.shrink);
    audit.append(AuditRecord {
        timestamp_ms: now_ms(),
        trial: None,
        step: ctx.step,
        exchange: attempts,
        agent: 0,
        direction: Direction::Outcome,
        payload: format!("fallback {p}"),
    });
    Refinement { probabilities: p, provenance: Provenance::Fallback, attempts }
}
