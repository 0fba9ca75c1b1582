//! Branch-probability recalibration: forecast-error statistics, the two-agent
//! chat pipeline (analysis, then extraction), validation, and a deterministic
//! fallback used whenever the pipeline fails.

mod backend;
mod calibration;
mod extract;
mod prompt;
mod refine;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario_tree::ProbabilityVector;

pub use backend::{
    BackendConfig, BackendError, ChatBackend, ChatMessage, HttpChatBackend, NullBackend, Role, ScriptedBackend,
    API_KEY_ENV,
};
pub use calibration::{deterministic_calibration, DEFAULT_FLOOR, DEFAULT_SHRINK};
pub use extract::{extract_prob_new, parse_agent2_reply, render_agent2_reply, ExtractError, TRIGGER_PHRASE};
pub use prompt::{build_agent1_prompt, build_agent2_prompt};
pub use refine::{
    refine_probabilities, AuditLog, AuditRecord, Direction, RefineContext, RefineOptions, Refinement,
};

/// Default tolerance on the raw sum of a proposed vector.
pub const DEFAULT_SUM_TOL: f64 = 1e-3;

/// Where a step's branch probabilities came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// The configured default vector.
    Default,
    /// Accepted from the chat pipeline.
    Llm,
    /// The deterministic calibration after the pipeline failed.
    Fallback,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Default => "default",
            Provenance::Llm => "llm",
            Provenance::Fallback => "fallback",
        })
    }
}

/// Forecast errors `actual - forecast` in GW with their mean and sample
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub errors: Vec<f64>,
    pub mu: f64,
    /// N-1 denominator; 0 for a single observation.
    pub sigma: f64,
    pub count: usize,
}

pub fn compute_error_stats(actual: &[f64], forecast: &[f64]) -> Result<ErrorStats> {
    if actual.len() != forecast.len() {
        return Err(Error::domain(format!(
            "{} actual values but {} forecasts",
            actual.len(),
            forecast.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::domain("no observations"));
    }
    let errors: Vec<f64> = actual.iter().zip(forecast).map(|(a, f)| a - f).collect();
    let n = errors.len();
    let mu = errors.iter().sum::<f64>() / n as f64;
    let sigma = if n == 1 {
        0.0
    } else {
        (errors.iter().map(|e| (e - mu) * (e - mu)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(ErrorStats { errors, mu, sigma, count: n })
}

/// Why a proposed probability vector was refused.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("expected {expected} probabilities, got {got}")]
    Length { expected: usize, got: usize },
    #[error("entry {index} is {value}, probabilities must be non-negative and finite")]
    Negative { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, more than {tol} away from 1")]
    SumDrift { sum: f64, tol: f64 },
}

/// Accepts a proposal of the right length with non-negative entries summing
/// to one within `sum_tol`, and rescales it to sum to one.
pub fn validate_probability_vector(
    v: &[f64],
    expected_len: usize,
    sum_tol: f64,
) -> Result<ProbabilityVector, ValidationError> {
    if v.len() != expected_len {
        return Err(ValidationError::Length { expected: expected_len, got: v.len() });
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
        return Err(ValidationError::Negative { index, value });
    }
    let sum: f64 = v.iter().sum();
    if !((sum - 1.0).abs() <= sum_tol) || sum <= 0.0 {
        return Err(ValidationError::SumDrift { sum, tol: sum_tol });
    }
    let scaled = if sum == 1.0 { v.to_vec() } else { v.iter().map(|x| x / sum).collect() };
    Ok(ProbabilityVector::from_checked(scaled))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_zero_error() {
        let s = compute_error_stats(&[3.0, 4.0, 9.5], &[3.0, 4.0, 9.5]).unwrap();
        assert_eq!(s.errors, vec![0.0; 3]);
        assert_eq!((s.mu, s.sigma, s.count), (0.0, 0.0, 3));
    }

    #[test]
    fn stats_two_points() {
        let s = compute_error_stats(&[5.0, 3.0], &[4.0, 4.0]).unwrap();
        assert_eq!(s.errors, vec![1.0, -1.0]);
        assert_eq!(s.mu, 0.0);
        assert!((s.sigma - 1.4142135624).abs() < 1e-10);
    }

    #[test]
    fn stats_three_points() {
        let s = compute_error_stats(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.errors, vec![1.0, 2.0, 3.0]);
        assert_eq!(s.mu, 2.0);
        assert!((s.sigma - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stats_single_point_sigma_zero() {
        let s = compute_error_stats(&[7.0], &[5.0]).unwrap();
        assert_eq!((s.mu, s.sigma), (2.0, 0.0));
    }

    #[test]
    fn stats_reject_bad_lengths() {
        assert!(compute_error_stats(&[], &[]).is_err());
        assert!(compute_error_stats(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn validate_accepts_exact_vector() {
        let v = [0.05, 0.25, 0.4, 0.25, 0.05];
        let p = validate_probability_vector(&v, 5, DEFAULT_SUM_TOL).unwrap();
        for (a, b) in p.as_slice().iter().zip(v) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn validate_renormalizes_small_drift() {
        let v = [0.1, 0.2, 0.4, 0.2, 0.0999];
        let sum: f64 = v.iter().sum();
        let p = validate_probability_vector(&v, 5, DEFAULT_SUM_TOL).unwrap();
        for (a, b) in p.as_slice().iter().zip(v) {
            assert!((a - b / 0.9999).abs() < 1e-12);
            assert_eq!(*a, b / sum);
        }
        assert!((p.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validate_rejections() {
        assert!(matches!(
            validate_probability_vector(&[0.5, -0.1, 0.2, 0.2, 0.2], 5, DEFAULT_SUM_TOL),
            Err(ValidationError::Negative { index: 1, .. })
        ));
        assert!(matches!(
            validate_probability_vector(&[0.5, 0.5], 5, DEFAULT_SUM_TOL),
            Err(ValidationError::Length { expected: 5, got: 2 })
        ));
        assert!(matches!(
            validate_probability_vector(&[0.2, 0.2, 0.2, 0.2, 0.25], 5, DEFAULT_SUM_TOL),
            Err(ValidationError::SumDrift { .. })
        ));
        assert!(validate_probability_vector(&[f64::NAN, 0.2, 0.2, 0.2, 0.4], 5, DEFAULT_SUM_TOL).is_err());
    }
}
