//! Config, day-data and report files.

use proptest::prelude::*;
use windcommit::agents::Provenance;
use windcommit::io::{
    generate_synthetic_day, load_config, parse_config, parse_day_csv, render_config, render_day_csv, write_config,
    write_report, DayData, RunOutput,
};
use windcommit::simulator::{Mode, ProbabilityRule, SimulationConfig, SimulationReport, StepRecord, Totals};
use windcommit::Error;

const CUSTOM: &str = r#"
[simulation]
dt_hours = 1.0
total_steps = 24
lookahead = 6
mode = "llm"
trials = 4
seed = 9

[scenario_tree]
phi = 1.1
eps_c = 0.2
quantiles = [0.05, 0.5, 0.95]
probability_rule = "midpoint"

[system]
voll_usd_per_gwh = 250000
wind_cap_gw = 18

[[generators]]
name = "coal"
startup_cost_musd = 3
p_max_gw = 20
p_min_gw = 5
gen_cost_kusd_per_gwh = 35
ramp_up_gw_per_h = 5

[agents]
max_retries = 1
history_window = 12
"#;

#[test]
fn custom_config_converts_units() {
    let cfg = parse_config(CUSTOM).unwrap();
    assert_eq!(cfg.mode, Mode::Llm);
    assert_eq!(cfg.probability_rule, ProbabilityRule::Midpoint);
    assert_eq!(cfg.quantiles.levels(), [0.05, 0.5, 0.95]);
    let g = &cfg.generators[0];
    assert_eq!((g.startup_cost, g.gen_cost, g.ramp_down), (3e6, 35e3, 5.0));
    assert_eq!(cfg.voll, 250_000.0);
    assert_eq!(cfg.agents.refine.max_retries, 1);
    assert_eq!(cfg.agents.history_window, Some(12));
    assert_eq!(cfg.baseline_probabilities().len(), 3);
}

#[test]
fn rendered_config_loads_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [SimulationConfig::default(), parse_config(CUSTOM).unwrap()] {
        let path = write_config(&cfg, &dir.path().join("c.toml")).unwrap();
        assert_eq!(load_config(&path).unwrap(), cfg);
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }
}

#[test]
fn config_errors_name_the_field() {
    let e = parse_config("[scenario_tree]\nphi = -1\n").unwrap_err();
    assert!(e.to_string().contains("phi"), "{e}");
    let e = parse_config("[simulation]\nlookahed = 4\n").unwrap_err();
    assert!(e.to_string().contains("lookahed"), "{e}");
    let e = parse_config("[simulation]\ntotal_steps = \"many\"\n").unwrap_err();
    assert!(matches!(e, Error::Config { .. }), "{e}");
}

#[test]
fn day_errors_locate_the_cell() {
    let text = "step,demand_actual,demand_forecast,wind_actual,wind_forecast\n0,20,20,5,5\n1,20,x,5,5\n";
    match parse_day_csv(text) {
        Err(Error::Ingest { row: Some(2), column: Some(c), .. }) => assert_eq!(c, "demand_forecast"),
        other => panic!("unexpected {other:?}"),
    }
    match parse_day_csv("step,demand_actual,demand_forecast,wind_actual\n0,1,1,1\n") {
        Err(Error::Ingest { column: Some(c), .. }) => assert_eq!(c, "wind_forecast"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(parse_day_csv("step,demand_actual,demand_forecast,wind_actual,wind_forecast\n0,1,1,-1,1\n").is_err());
}

#[test]
fn synthetic_day_shape() {
    let cfg = SimulationConfig::default();
    let a = generate_synthetic_day(7, &cfg);
    assert_eq!(a, generate_synthetic_day(7, &cfg));
    assert_ne!(a, generate_synthetic_day(8, &cfg));
    assert_eq!(a.len(), 48);
    assert_eq!(a.demand_actual[8], 18.0);
    assert_eq!(a.demand_actual[32], 38.0);
    assert_eq!(a.demand_actual, a.demand_forecast);
    assert!(a.wind_actual.iter().chain(&a.wind_forecast).all(|&w| (0.0..=20.0).contains(&w)));
    assert_eq!(parse_day_csv(windcommit::cli::BUNDLED_DAY).unwrap(), a);
}

fn step(k: usize, cost: f64) -> StepRecord {
    StepRecord {
        step: k,
        initial_commitment: vec![true],
        initial_output: vec![1.0],
        commitment: vec![true],
        output: vec![1.0],
        wind: 0.0,
        demand: 1.0,
        load_curtail: 0.0,
        wind_curtail: 0.0,
        cost,
        startup_cost: 0.0,
        generation_cost: cost,
        load_curtail_cost: 0.0,
        planned_objective: cost,
        probabilities: vec![1.0],
        provenance: Provenance::Default,
        nodes: 1,
        solve_seconds: 0.25,
    }
}

fn report(trial: Option<usize>, costs: &[f64]) -> SimulationReport {
    let steps: Vec<StepRecord> = costs.iter().enumerate().map(|(k, &c)| step(k, c)).collect();
    let totals = Totals::from_steps(&steps, 0.5);
    SimulationReport { mode: Mode::Llm, trial, seed: 1, dt: 0.5, steps, totals }
}

#[test]
fn report_with_trials_writes_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimulationConfig::default();
    let day = generate_synthetic_day(1, &cfg);
    let baseline = report(None, &[2e6, 3e6]);
    let trials: Vec<_> = (0..10).map(|i| report(Some(i), &[2e6 + i as f64 * 1e5, 2.5e6])).collect();
    let out = RunOutput { config: &cfg, data: &day, primary: &baseline, trials: &trials, audit_log: None };
    let a = write_report(&out, dir.path()).unwrap();
    let dist = std::fs::read_to_string(a.distribution.unwrap()).unwrap();
    assert_eq!(dist.lines().count(), 11);
    assert!(dist.lines().nth(1).unwrap().starts_with("0,4.5,"));
    assert_eq!(std::fs::read_to_string(a.envelope.unwrap()).unwrap().lines().count(), 3);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&a.report).unwrap()).unwrap();
    // 4.5 .. 5.4 M$ against 5 M$; a tie is not a win
    assert_eq!(json["comparison"]["success_rate"], 0.5);
    assert_eq!(json["trials"].as_array().unwrap().len(), 10);
    // wall time is not part of the report
    assert!(json["report"]["steps"][0].get("solve_seconds").is_none());
    let table = std::fs::read_to_string(&a.table).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.contains("SUC,5,0,0"));
}

#[test]
fn report_without_trials_has_no_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimulationConfig::default();
    let day = generate_synthetic_day(1, &cfg);
    let primary = report(None, &[1e6]);
    let out = RunOutput { config: &cfg, data: &day, primary: &primary, trials: &[], audit_log: None };
    let a = write_report(&out, dir.path()).unwrap();
    assert!(a.envelope.is_none() && a.distribution.is_none());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&a.report).unwrap()).unwrap();
    assert!(json.get("comparison").is_none());
    assert_eq!(json["summary"]["total_cost_musd"], 1.0);
    let back = windcommit::io::load_config(&a.config).unwrap();
    assert_eq!(back, cfg);
}

proptest! {
    #[test]
    fn day_csv_round_trips(rows in prop::collection::vec((0.0f64..60.0, 0.0f64..60.0, 0.0f64..25.0, 0.0f64..25.0), 1..50)) {
        let day = DayData {
            demand_actual: rows.iter().map(|r| r.0).collect(),
            demand_forecast: rows.iter().map(|r| r.1).collect(),
            wind_actual: rows.iter().map(|r| r.2).collect(),
            wind_forecast: rows.iter().map(|r| r.3).collect(),
        };
        prop_assert_eq!(parse_day_csv(&render_day_csv(&day)).unwrap(), day);
    }
}
