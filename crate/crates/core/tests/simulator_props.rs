//! Rolling-horizon invariants on synthetic days.

mod common;

use proptest::prelude::*;
use windcommit::agents::{compute_error_stats, deterministic_calibration, AuditLog, Provenance};
use windcommit::io::{generate_synthetic_day, DayData};
use windcommit::simulator::{realized_history, run_simulation, Mode, SimulationConfig, SimulationReport};
use windcommit::uc::UcInstance;

fn short(steps: usize, lookahead: usize) -> SimulationConfig {
    SimulationConfig { total_steps: steps, lookahead, ..SimulationConfig::default() }
}

fn check_invariants(cfg: &SimulationConfig, r: &SimulationReport) -> Result<(), String> {
    let init = cfg.initial_state();
    let (mut y, mut p) = (init.commitment, init.output);
    for s in &r.steps {
        if s.initial_commitment != y || s.initial_output != p {
            return Err(format!("step {}: state not carried over", s.step));
        }
        let balance = s.output.iter().sum::<f64>() + s.wind - s.wind_curtail + s.load_curtail - s.demand;
        if balance.abs() > 1e-6 {
            return Err(format!("step {}: balance {balance:e}", s.step));
        }
        if s.wind_curtail < -1e-9 || s.wind_curtail > s.wind + 1e-9 {
            return Err(format!("step {}: wind curtailment {}", s.step, s.wind_curtail));
        }
        if s.load_curtail < -1e-9 || s.load_curtail > s.demand + 1e-9 {
            return Err(format!("step {}: load curtailment {}", s.step, s.load_curtail));
        }
        let parts = s.startup_cost + s.generation_cost + s.load_curtail_cost;
        if (parts - s.cost).abs() > 1e-6 * s.cost.max(1.0) {
            return Err(format!("step {}: cost parts {parts} vs {}", s.step, s.cost));
        }
        y = s.commitment.clone();
        p = s.output.clone();
    }
    Ok(())
}

#[test]
fn null_backend_reproduces_calibration() {
    let cfg = SimulationConfig { mode: Mode::Llm, ..short(8, 4) };
    let day = generate_synthetic_day(3, &SimulationConfig::default());
    let mut log = AuditLog::new();
    let r = run_simulation(&cfg, &day, None, &mut log).unwrap();
    assert_eq!(r.count(Provenance::Fallback), 8);
    let defaults = cfg.baseline_probabilities();
    for s in &r.steps {
        let (actual, forecast) = realized_history(&day, s.step, &cfg);
        let stats = compute_error_stats(&actual, &forecast).unwrap();
        let r = &cfg.agents.refine;
        let want = deterministic_calibration(&stats, &cfg.quantiles, &defaults, r.floor, r.shrink);
        assert_eq!(s.probabilities, want.as_slice());
    }
    // one fallback outcome per step
    assert_eq!(log.records().iter().filter(|r| r.payload.starts_with("fallback")).count(), 8);
}

#[test]
fn runs_are_deterministic() {
    let cfg = short(6, 4);
    let day = generate_synthetic_day(11, &SimulationConfig::default());
    let a = run_simulation(&cfg, &day, None, &mut AuditLog::new()).unwrap();
    let b = run_simulation(&cfg, &day, None, &mut AuditLog::new()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn flat_day_costs_match_fixed_commitment_dispatch() {
    let n = 4;
    let day = DayData {
        demand_actual: vec![25.0; n],
        demand_forecast: vec![25.0; n],
        wind_actual: vec![0.0; n],
        wind_forecast: vec![0.0; n],
    };
    let cfg = SimulationConfig { dt: 1.0, ..short(n, 3) };
    let r = run_simulation(&cfg, &day, None, &mut AuditLog::new()).unwrap();
    check_invariants(&cfg, &r).unwrap();
    for s in &r.steps {
        let inst = UcInstance {
            generators: cfg.generators.clone(),
            dt: cfg.dt,
            voll: cfg.voll,
            demand: vec![25.0],
            wind: vec![vec![0.0]],
            probabilities: windcommit::scenario_tree::ProbabilityVector::unit(1, 0),
            initial_commitment: s.initial_commitment.clone(),
            initial_output: s.initial_output.clone(),
            nonanticipativity_stages: 1,
            ramp_mode: cfg.ramp_mode,
        };
        let y = vec![s.commitment.iter().map(|&on| vec![on]).collect::<Vec<_>>()];
        let want = common::dispatch(&inst, &y).unwrap();
        assert!(common::rel_close(s.cost, want, 1e-9), "step {}: {} vs {want}", s.step, s.cost);
    }
}

#[test]
fn window_shrinks_at_the_end_of_the_day() {
    let day = generate_synthetic_day(5, &SimulationConfig { total_steps: 10, ..SimulationConfig::default() });
    let cfg = short(10, 8);
    let r = run_simulation(&cfg, &day, None, &mut AuditLog::new()).unwrap();
    assert_eq!(r.steps.len(), 10);
    check_invariants(&cfg, &r).unwrap();
}

#[test]
fn too_little_data_is_rejected() {
    let day = generate_synthetic_day(5, &SimulationConfig { total_steps: 4, ..SimulationConfig::default() });
    assert!(run_simulation(&short(6, 4), &day, None, &mut AuditLog::new()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn synthetic_days_stay_feasible(seed in any::<u64>(), lookahead in 1usize..6) {
        let cfg = short(6, lookahead);
        let day = generate_synthetic_day(seed, &SimulationConfig::default());
        let r = run_simulation(&cfg, &day, None, &mut AuditLog::new()).unwrap();
        prop_assert_eq!(r.steps.len(), 6);
        if let Err(e) = check_invariants(&cfg, &r) {
            prop_assert!(false, "{}", e);
        }
        let t = &r.totals;
        let cost: f64 = r.steps.iter().map(|s| s.cost).sum();
        prop_assert!((t.cost - cost).abs() <= 1e-9 * cost.max(1.0));
    }
}
