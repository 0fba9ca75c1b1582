//! Solves one rolling window: three units, five wind scenarios, eight
//! half-hour stages, then checks the decoded optimum against the domain
//! constraints and recomputes its cost independently.
//!
//! ```bash
//! cargo run -p windcommit --example solve_uc_window
//! ```

use std::time::Instant;

use windcommit::milp::{solve_milp, MilpOptions};
use windcommit::scenario_tree::{build_error_tree, ArParams, ErrorMode, ProbabilityVector, QuantileSet};
use windcommit::uc::{build_milp, check_feasibility, evaluate_solution, reference_generators, RampMode, UcInstance, DEFAULT_VOLL};

pub fn run() -> windcommit::Result<()> {
    let quantiles = QuantileSet::default();
    let tree = build_error_tree(&quantiles, ArParams::default(), 8)?;
    let forecast = [12.0, 13.5, 15.0, 16.0, 15.5, 14.0, 11.0, 9.0];
    let wind = tree.apply_errors(&forecast, 20.0, ErrorMode::PerUnit)?;

    let generators = reference_generators();
    let instance = UcInstance {
        initial_commitment: vec![true; generators.len()],
        initial_output: generators.iter().map(|g| g.p_min).collect(),
        generators,
        dt: 0.5,
        voll: DEFAULT_VOLL,
        demand: vec![26.0, 28.0, 31.0, 34.0, 36.0, 37.5, 38.0, 37.0],
        wind,
        probabilities: ProbabilityVector::default_for(&quantiles),
        nonanticipativity_stages: 1,
        ramp_mode: RampMode::StartupAware,
    };

    let (problem, index) = build_milp(&instance)?;
    let started = Instant::now();
    let solution = solve_milp(&problem, &MilpOptions::default())?;
    println!(
        "{} columns, {} rows: {:?} in {:.2?}, {} nodes, objective {:.2} $",
        problem.num_vars(),
        problem.constraints.len(),
        solution.status,
        started.elapsed(),
        solution.nodes_explored,
        solution.objective
    );

    let decoded = index.decode(&solution.values, solution.objective);
    let costs = evaluate_solution(&instance, &decoded);
    let violations = check_feasibility(&instance, &decoded, 1e-6);
    println!(
        "recomputed expected cost {:.2} $ (startup {:.0}, generation {:.0}, VOLL {:.0}); {} violations",
        costs.total,
        costs.startup_total,
        costs.generation_total,
        costs.load_curtail_cost,
        violations.len()
    );
    for g in 0..instance.generators.len() {
        let row: Vec<String> = (0..instance.stages()).map(|t| format!("{:5.2}", decoded.output[0][g][t])).collect();
        println!("  {} scenario 1: {}", instance.generators[g].name, row.join(" "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
