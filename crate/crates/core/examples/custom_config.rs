//! Loads a TOML configuration with a different fleet and tree, generates a
//! matching synthetic day, and runs a short simulation.
//!
//! ```bash
//! cargo run -p windcommit --example custom_config
//! ```

use windcommit::agents::AuditLog;
use windcommit::io::{generate_synthetic_day, parse_config, render_config, render_table_row};
use windcommit::simulator::run_simulation;

const CONFIG: &str = r#"
[simulation]
dt_hours = 1.0
total_steps = 12
lookahead = 4

[scenario_tree]
quantiles = [0.1, 0.5, 0.9]
probability_rule = "midpoint"

[system]
wind_cap_gw = 15

[[generators]]
name = "base"
startup_cost_musd = 5
p_max_gw = 25
p_min_gw = 8
gen_cost_kusd_per_gwh = 30
ramp_up_gw_per_h = 3

[[generators]]
name = "peaker"
startup_cost_musd = 0.5
p_max_gw = 15
p_min_gw = 0
gen_cost_kusd_per_gwh = 150
ramp_up_gw_per_h = 15
"#;

pub fn run() -> windcommit::Result<()> {
    let cfg = parse_config(CONFIG)?;
    println!("probabilities {}", cfg.baseline_probabilities());
    let day = generate_synthetic_day(21, &cfg);
    let report = run_simulation(&cfg, &day, None, &mut AuditLog::new())?;
    for s in &report.steps {
        println!("  step {:2}: on {:?}, output {:?}", s.step, s.commitment, s.output);
    }
    println!("totals: {}", render_table_row(&report.totals));
    println!("effective config:\n{}", render_config(&cfg));
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
