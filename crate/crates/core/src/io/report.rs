use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{usd_to_musd, ConfigFile};
use super::data::{write_day_csv, DayData};
use crate::error::{Error, Result};
use crate::simulator::{compare_trials, ComparisonSummary, SimulationConfig, SimulationReport, Totals};

/// Everything a run produced, borrowed for writing.
pub struct RunOutput<'a> {
    pub config: &'a SimulationConfig,
    pub data: &'a DayData,
    /// The run itself, or the baseline when trials are present.
    pub primary: &'a SimulationReport,
    pub trials: &'a [SimulationReport],
    pub audit_log: Option<&'a Path>,
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunArtifacts {
    pub report: PathBuf,
    pub config: PathBuf,
    pub data: PathBuf,
    pub table: PathBuf,
    pub step_costs: PathBuf,
    pub audit_log: Option<PathBuf>,
    /// Per-step min/mean/max across trials with the baseline.
    pub envelope: Option<PathBuf>,
    /// One row per trial with the baseline cost alongside.
    pub distribution: Option<PathBuf>,
}

/// Two decimals with trailing zeros removed.
fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// `cost M$, load curtailment GWh, wind curtailment GWh`.
pub fn render_table_row(t: &Totals) -> String {
    format!("{}, {}, {}", fmt2(usd_to_musd(t.cost)), fmt2(t.load_curtail_gwh), fmt2(t.wind_curtail_gwh))
}

#[derive(Serialize)]
struct TotalsMusd {
    total_cost_musd: f64,
    load_curtail_gwh: f64,
    wind_curtail_gwh: f64,
}

impl From<&Totals> for TotalsMusd {
    fn from(t: &Totals) -> Self {
        Self { total_cost_musd: usd_to_musd(t.cost), load_curtail_gwh: t.load_curtail_gwh, wind_curtail_gwh: t.wind_curtail_gwh }
    }
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    config: ConfigFile,
    summary: TotalsMusd,
    report: &'a SimulationReport,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    trials: &'a [SimulationReport],
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<ComparisonSummary>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `config.toml`, `day.csv`, `table.csv` and
/// `step_costs.csv`; with trials also `envelope.csv` and `trial_costs.csv`.
pub fn write_report(run: &RunOutput<'_>, out_dir: &Path) -> Result<RunArtifacts> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let comparison = compare_trials(run.primary, run.trials);

    let report = out_dir.join("report.json");
    let doc = ReportDocument {
        config: ConfigFile::from_config(run.config),
        summary: (&run.primary.totals).into(),
        report: run.primary,
        trials: run.trials,
        comparison: comparison.clone(),
    };
    let mut json = serde_json::to_string_pretty(&doc).map_err(|e| Error::Domain(e.to_string()))?;
    json.push('\n');
    write(&report, &json)?;

    let config = out_dir.join("config.toml");
    write(&config, &super::config::render_config(run.config))?;
    let data = out_dir.join("day.csv");
    write_day_csv(run.data, &data)?;

    let table = out_dir.join("table.csv");
    let mut t = String::from("method,total_cost_musd,load_curtail_gwh,wind_curtail_gwh\n");
    let label = if comparison.is_some() { "SUC".to_string() } else { run.primary.mode.to_string() };
    let _ = writeln!(t, "{label},{}", render_table_row(&run.primary.totals).replace(", ", ","));
    if let Some(c) = &comparison {
        let _ = writeln!(
            t,
            "LLM-SUC mean,{},{},{}",
            fmt2(usd_to_musd(c.cost.mean)),
            fmt2(c.load_curtail.mean),
            fmt2(c.wind_curtail.mean)
        );
        let _ = writeln!(
            t,
            "LLM-SUC std,{},{},{}",
            fmt2(usd_to_musd(c.cost.std)),
            fmt2(c.load_curtail.std),
            fmt2(c.wind_curtail.std)
        );
    }
    write(&table, &t)?;

    let step_costs = out_dir.join("step_costs.csv");
    let mut s = String::from("step,cost_musd,load_curtail_gw,wind_curtail_gw,provenance\n");
    for r in &run.primary.steps {
        let _ = writeln!(s, "{},{},{},{},{}", r.step, usd_to_musd(r.cost), r.load_curtail, r.wind_curtail, r.provenance);
    }
    write(&step_costs, &s)?;

    let (envelope, distribution) = match &comparison {
        Some(c) => {
            let envelope = out_dir.join("envelope.csv");
            let mut e = String::from("step,min_musd,mean_musd,max_musd,baseline_musd\n");
            for row in &c.envelope {
                let _ = writeln!(
                    e,
                    "{},{},{},{},{}",
                    row.step,
                    usd_to_musd(row.min),
                    usd_to_musd(row.mean),
                    usd_to_musd(row.max),
                    usd_to_musd(row.baseline)
                );
            }
            write(&envelope, &e)?;
            let distribution = out_dir.join("trial_costs.csv");
            let mut d =
                String::from("trial,total_cost_musd,load_curtail_gwh,wind_curtail_gwh,baseline_cost_musd,below_baseline\n");
            for row in &c.trials {
                let _ = writeln!(
                    d,
                    "{},{},{},{},{},{}",
                    row.trial,
                    usd_to_musd(row.totals.cost),
                    row.totals.load_curtail_gwh,
                    row.totals.wind_curtail_gwh,
                    usd_to_musd(c.baseline.cost),
                    row.below_baseline
                );
            }
            write(&distribution, &d)?;
            (Some(envelope), Some(distribution))
        }
        None => (None, None),
    };

    Ok(RunArtifacts {
        report,
        config,
        data,
        table,
        step_costs,
        audit_log: run.audit_log.filter(|p| p.exists()).map(Path::to_path_buf),
        envelope,
        distribution,
    })
}
