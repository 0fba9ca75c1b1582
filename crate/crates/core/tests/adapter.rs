//! The LP-file adapter driving this crate's own binary as the external solver.

use windcommit::milp::adapter::ExternalSolver;
use windcommit::milp::lp_format::{read_lp, write_lp};
use windcommit::milp::{solve_milp, Comparator, MilpOptions, MilpProblem, MilpStatus};
use windcommit::scenario_tree::ProbabilityVector;
use windcommit::uc::{build_milp, reference_generators, RampMode, UcInstance, DEFAULT_VOLL};
use windcommit::Error;

fn self_solver(dir: &std::path::Path) -> ExternalSolver {
    let mut s = ExternalSolver::new(
        env!("CARGO_BIN_EXE_windcommit"),
        ["solve", "--lp-file", "{lp}", "--solution-out", "{sol}"],
    );
    s.work_dir = Some(dir.to_path_buf());
    s
}

fn window() -> UcInstance {
    let generators = reference_generators();
    UcInstance {
        initial_commitment: vec![true, true, false],
        initial_output: vec![3.0, 2.0, 0.0],
        generators,
        dt: 0.5,
        voll: DEFAULT_VOLL,
        demand: vec![20.0, 24.0, 27.0],
        wind: vec![vec![4.0, 3.0, 2.5], vec![4.0, 5.0, 6.0]],
        probabilities: ProbabilityVector::new(vec![0.5, 0.5]).unwrap(),
        nonanticipativity_stages: 1,
        ramp_mode: RampMode::StartupAware,
    }
}

#[test]
fn external_round_trip_matches_internal_solve() {
    let dir = tempfile::tempdir().unwrap();
    let (p, _) = build_milp(&window()).unwrap();
    let internal = solve_milp(&p, &MilpOptions::default()).unwrap();
    let external = self_solver(dir.path()).solve(&p).unwrap();
    assert_eq!(external.status, MilpStatus::Optimal);
    assert!((external.objective - internal.objective).abs() <= 1e-6 * internal.objective.abs());
    assert!(p.residuals(&external.values).row <= 1e-6);
    // interchange files are cleaned up
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn lp_text_survives_a_round_trip() {
    let (p, _) = build_milp(&window()).unwrap();
    let model = read_lp(&write_lp(&p)).unwrap();
    assert_eq!(model.problem.num_vars(), p.num_vars());
    assert_eq!(model.problem.constraints.len(), p.constraints.len());
    let a = solve_milp(&p, &MilpOptions::default()).unwrap();
    let b = solve_milp(&model.problem, &MilpOptions::default()).unwrap();
    assert!((a.objective - b.objective).abs() <= 1e-6 * a.objective.abs());
}

#[test]
fn infeasible_status_comes_back() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = MilpProblem::new();
    let x = p.add_binary("x", 1.0);
    p.add_constraint("c", vec![(x, 1.0)], Comparator::Ge, 2.0);
    let s = self_solver(dir.path()).solve(&p).unwrap();
    assert_eq!(s.status, MilpStatus::Infeasible);
}

#[test]
fn failing_program_is_an_adapter_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut solver = self_solver(dir.path());
    solver.args = vec!["solve".into(), "--lp-file".into(), "/nonexistent/problem.lp".into()];
    let (p, _) = build_milp(&window()).unwrap();
    match solver.solve(&p) {
        Err(Error::Adapter { message, .. }) => assert!(message.contains("exited"), "{message}"),
        other => panic!("expected adapter error, got {other:?}"),
    }
}

#[test]
fn missing_executable_is_an_adapter_error() {
    let solver = ExternalSolver::new("/definitely/not/a/solver", ["{lp}"]);
    let (p, _) = build_milp(&window()).unwrap();
    match solver.solve(&p) {
        Err(Error::Adapter { message, .. }) => assert!(message.contains("could not start"), "{message}"),
        other => panic!("expected adapter error, got {other:?}"),
    }
}
