use serde::{Deserialize, Serialize};

use super::{SimulationReport, Totals};

/// Sample statistics of one metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// N-1 denominator; 0 for a single trial.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// `std / mean`, 0 when the mean is 0.
    pub cv: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, std: 0.0, min: 0.0, max: 0.0, cv: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cv = if mean == 0.0 { 0.0 } else { std / mean };
        Self { mean, std, min, max, cv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTotals {
    pub trial: usize,
    pub totals: Totals,
    pub below_baseline: bool,
}

/// Per-step realized cost across trials, $.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub step: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub baseline: Totals,
    pub trials: Vec<TrialTotals>,
    pub cost: MetricSummary,
    pub load_curtail: MetricSummary,
    pub wind_curtail: MetricSummary,
    /// Fraction of trials strictly cheaper than the baseline.
    pub success_rate: f64,
    pub envelope: Vec<EnvelopeRow>,
}

/// Cross-trial statistics against a baseline run. `None` without trials.
pub fn compare_trials(baseline: &SimulationReport, trials: &[SimulationReport]) -> Option<ComparisonSummary> {
    if trials.is_empty() {
        return None;
    }
    let pick = |f: fn(&Totals) -> f64| trials.iter().map(|r| f(&r.totals)).collect::<Vec<_>>();
    let rows: Vec<TrialTotals> = trials
        .iter()
        .enumerate()
        .map(|(i, r)| TrialTotals {
            trial: r.trial.unwrap_or(i),
            totals: r.totals,
            below_baseline: r.totals.cost < baseline.totals.cost,
        })
        .collect();
    let wins = rows.iter().filter(|r| r.below_baseline).count();
    let steps = trials.iter().map(|r| r.steps.len()).min().unwrap_or(0).min(baseline.steps.len());
    let envelope = (0..steps)
        .map(|t| {
            let costs: Vec<f64> = trials.iter().map(|r| r.steps[t].cost).collect();
            let m = MetricSummary::of(&costs);
            EnvelopeRow { step: baseline.steps[t].step, min: m.min, mean: m.mean, max: m.max, baseline: baseline.steps[t].cost }
        })
        .collect();
    Some(ComparisonSummary {
        baseline: baseline.totals,
        cost: MetricSummary::of(&pick(|t| t.cost)),
        load_curtail: MetricSummary::of(&pick(|t| t.load_curtail_gwh)),
        wind_curtail: MetricSummary::of(&pick(|t| t.wind_curtail_gwh)),
        success_rate: wins as f64 / trials.len() as f64,
        trials: rows,
        envelope,
    })
}
