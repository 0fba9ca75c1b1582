use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario_tree::inverse_normal_cdf;
use crate::simulator::SimulationConfig;

pub const DAY_COLUMNS: [&str; 5] = ["step", "demand_actual", "demand_forecast", "wind_actual", "wind_forecast"];

/// One day of demand and wind, GW per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayData {
    pub demand_actual: Vec<f64>,
    pub demand_forecast: Vec<f64>,
    pub wind_actual: Vec<f64>,
    pub wind_forecast: Vec<f64>,
}

impl DayData {
    pub fn len(&self) -> usize {
        self.demand_actual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand_actual.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Ingest { row: None, column: None, message: "day has no steps".into() });
        }
        for (name, col) in self.columns() {
            if col.len() != n {
                return Err(Error::Ingest {
                    row: None,
                    column: Some(name.into()),
                    message: format!("{} values, expected {n}", col.len()),
                });
            }
            if let Some(i) = col.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Ingest {
                    row: Some(i + 1),
                    column: Some(name.into()),
                    message: format!("{} is negative or not finite", col[i]),
                });
            }
        }
        Ok(())
    }

    /// Caps wind at `cap` and returns how many values were changed.
    pub fn clamp_wind(&mut self, cap: f64) -> usize {
        let mut changed = 0;
        for x in self.wind_actual.iter_mut().chain(self.wind_forecast.iter_mut()) {
            if *x > cap {
                *x = cap;
                changed += 1;
            }
        }
        changed
    }

    fn columns(&self) -> [(&'static str, &Vec<f64>); 4] {
        [
            ("demand_actual", &self.demand_actual),
            ("demand_forecast", &self.demand_forecast),
            ("wind_actual", &self.wind_actual),
            ("wind_forecast", &self.wind_forecast),
        ]
    }
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line() as usize);
    Error::Ingest { row, column: None, message: e.to_string() }
}

/// Reads a day CSV. Rows are numbered from 1, not counting the header.
pub fn load_day_csv(path: &Path) -> Result<DayData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_day_csv(&text)
}

pub fn parse_day_csv(text: &str) -> Result<DayData> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(DAY_COLUMNS) {
        *slot = headers.iter().position(|h| h == name).ok_or_else(|| Error::Ingest {
            row: None,
            column: Some(name.into()),
            message: "missing column".into(),
        })?;
    }
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Ingest { row: Some(row), column: None, message: e.to_string() })?;
        let cell = |c: usize| -> Result<&str> {
            record.get(index[c]).ok_or_else(|| Error::Ingest {
                row: Some(row),
                column: Some(DAY_COLUMNS[c].into()),
                message: "missing value".into(),
            })
        };
        let step = cell(0)?;
        if step.parse::<u64>().is_err() {
            return Err(Error::Ingest {
                row: Some(row),
                column: Some("step".into()),
                message: format!("`{step}` is not a step index"),
            });
        }
        for (c, col) in cols.iter_mut().enumerate() {
            let raw = cell(c + 1)?;
            let at = |message: String| Error::Ingest { row: Some(row), column: Some(DAY_COLUMNS[c + 1].into()), message };
            let v: f64 = raw.parse().map_err(|_| at(format!("`{raw}` is not a number")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(at(format!("{v} is negative or not finite")));
            }
            col.push(v);
        }
    }
    if cols[0].is_empty() {
        return Err(Error::Ingest { row: None, column: None, message: "no data rows".into() });
    }
    let [demand_actual, demand_forecast, wind_actual, wind_forecast] = cols;
    Ok(DayData { demand_actual, demand_forecast, wind_actual, wind_forecast })
}

/// CSV text with every value in shortest round-trip form.
pub fn render_day_csv(data: &DayData) -> String {
    let mut out = DAY_COLUMNS.join(",");
    out.push('\n');
    for t in 0..data.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t, data.demand_actual[t], data.demand_forecast[t], data.wind_actual[t], data.wind_forecast[t]
        ));
    }
    out
}

pub fn write_day_csv(data: &DayData, path: &Path) -> Result<()> {
    std::fs::write(path, render_day_csv(data)).map_err(|e| Error::io(path, e))
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
    inverse_normal_cdf(u, 0.0, 1.0).unwrap_or(0.0)
}

/// A reproducible synthetic day of `cfg.total_steps` steps.
///
/// Demand is a daily sinusoid between 18 GW (04:00) and 38 GW (16:00), with
/// the forecast equal to the actual. The wind forecast is a sum of three
/// seeded harmonics kept inside `[0, wind_cap]`. The actual wind applies a
/// per-unit AR(1) error `e(k) = phi * e(k-1) + eps_c * z(k)` that restarts at
/// zero every `lookahead` steps, as a fresh forecast would.
pub fn generate_synthetic_day(seed: u64, cfg: &SimulationConfig) -> DayData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.total_steps;
    let cap = cfg.wind_cap;
    let two_pi = std::f64::consts::TAU;

    let demand: Vec<f64> = (0..n)
        .map(|t| {
            let hour = t as f64 * cfg.dt;
            round4(28.0 - 10.0 * (two_pi * (hour - 4.0) / 24.0).cos()).clamp(18.0, 38.0)
        })
        .collect();

    let level = rng.random_range(0.3..0.55) * cap;
    let harmonics: Vec<(f64, f64, f64)> = (1..=3)
        .map(|j| {
            let amp = rng.random_range(0.05..0.2) * cap / j as f64;
            let phase = rng.random_range(0.0..two_pi);
            (j as f64, amp, phase)
        })
        .collect();
    let forecast: Vec<f64> = (0..n)
        .map(|t| {
            let x = t as f64 * cfg.dt / 24.0;
            let w = level + harmonics.iter().map(|(j, a, ph)| a * (two_pi * j * x + ph).sin()).sum::<f64>();
            round4(w.clamp(0.0, cap))
        })
        .collect();

    let block = cfg.lookahead.max(1);
    let mut e = 0.0;
    let actual: Vec<f64> = (0..n)
        .map(|t| {
            let z = standard_normal(&mut rng);
            e = if t % block == 0 { 0.0 } else { cfg.ar.phi * e + cfg.ar.eps_c * z };
            if e == 0.0 {
                forecast[t]
            } else {
                round4((forecast[t] * (1.0 + e)).clamp(0.0, cap))
            }
        })
        .collect();

    DayData { demand_actual: demand.clone(), demand_forecast: demand, wind_actual: actual, wind_forecast: forecast }
}
