//! Every offline example runs to completion.

#[path = "../examples/agent_pipeline.rs"]
mod agent_pipeline;
#[path = "../examples/custom_config.rs"]
mod custom_config;
#[path = "../examples/lp_interchange.rs"]
mod lp_interchange;
#[path = "../examples/rolling_day.rs"]
mod rolling_day;
#[path = "../examples/scenario_tree.rs"]
mod scenario_tree;
#[path = "../examples/solve_uc_window.rs"]
mod solve_uc_window;
#[path = "../examples/trials_comparison.rs"]
mod trials_comparison;

#[test]
fn agent_pipeline() {
    agent_pipeline::run().unwrap();
}

#[test]
fn custom_config() {
    custom_config::run().unwrap();
}

#[test]
fn lp_interchange() {
    lp_interchange::run().unwrap();
}

#[test]
fn rolling_day() {
    rolling_day::run().unwrap();
}

#[test]
fn scenario_tree() {
    scenario_tree::run().unwrap();
}

#[test]
fn solve_uc_window() {
    solve_uc_window::run().unwrap();
}

#[test]
fn trials_comparison() {
    trials_comparison::run().unwrap();
}
