//! Four llm-mode steps against a live chat-completions endpoint. Needs
//! `WINDCOMMIT_API_KEY`; without it the example says so and exits.
//!
//! ```bash
//! WINDCOMMIT_API_KEY=... cargo run -p windcommit --example live_agents
//! ```

use windcommit::agents::{AuditLog, HttpChatBackend, API_KEY_ENV};
use windcommit::cli::BUNDLED_DAY;
use windcommit::io::parse_day_csv;
use windcommit::simulator::{run_simulation, trial_seed, Mode, SimulationConfig};

fn main() -> windcommit::Result<()> {
    if std::env::var_os(API_KEY_ENV).is_none() {
        println!("set {API_KEY_ENV} to run against the live endpoint");
        return Ok(());
    }
    let cfg = SimulationConfig { mode: Mode::Llm, total_steps: 4, ..SimulationConfig::default() };
    let mut backend = HttpChatBackend::from_env(cfg.agents.backend.clone(), Some(trial_seed(cfg.seed, 0)))?;
    let mut audit = AuditLog::new();
    let report = run_simulation(&cfg, &parse_day_csv(BUNDLED_DAY)?, Some(&mut backend), &mut audit)?;
    for s in &report.steps {
        println!("step {}: {} {:?}", s.step, s.provenance, s.probabilities);
    }
    println!("{} exchanges logged", audit.exchanges());
    Ok(())
}
