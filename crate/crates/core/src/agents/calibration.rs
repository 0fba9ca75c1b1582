use crate::scenario_tree::{inverse_normal_cdf, ProbabilityVector, QuantileSet};

use super::ErrorStats;

pub const DEFAULT_FLOOR: f64 = 0.01;
/// Weight on the empirical bin frequencies.
pub const DEFAULT_SHRINK: f64 = 0.5;

const SIGMA_EPS: f64 = 1e-9;

/// Offline stand-in for the chat pipeline.
///
/// Errors are standardized with their own mean and deviation and counted in
/// bins whose edges are the standard-normal quantiles of the midpoints
/// between adjacent levels. The frequencies are blended with the defaults as
/// `shrink * empirical + (1 - shrink) * default`, floored, and rescaled.
pub fn deterministic_calibration(
    stats: &ErrorStats,
    quantiles: &QuantileSet,
    default_probs: &ProbabilityVector,
    floor: f64,
    shrink: f64,
) -> ProbabilityVector {
    let levels = quantiles.levels();
    let n = levels.len();
    let shrink = shrink.clamp(0.0, 1.0);
    let floor = if floor.is_finite() { floor.max(0.0) } else { 0.0 };

    let edges: Vec<f64> = levels
        .windows(2)
        .map(|w| inverse_normal_cdf(0.5 * (w[0] + w[1]), 0.0, 1.0).unwrap_or(0.0))
        .collect();
    let mut counts = vec![0usize; n];
    let sigma = stats.sigma.max(SIGMA_EPS);
    for e in &stats.errors {
        let z = (e - stats.mu) / sigma;
        counts[edges.partition_point(|&b| b <= z)] += 1;
    }
    let total = stats.errors.len().max(1) as f64;

    let defaults = default_probs.as_slice();
    let mut p: Vec<f64> = (0..n)
        .map(|i| {
            let d = defaults.get(i).copied().unwrap_or(1.0 / n as f64);
            if shrink == 0.0 {
                d
            } else {
                shrink * counts[i] as f64 / total + (1.0 - shrink) * d
            }
        })
        .collect();
    let mut floored = false;
    for x in &mut p {
        if *x < floor {
            *x = floor;
            floored = true;
        }
    }
    let sum: f64 = p.iter().sum();
    if floored || (sum - 1.0).abs() > 1e-12 {
        p.iter_mut().for_each(|x| *x /= sum);
    }
    ProbabilityVector::from_checked(p)
}
