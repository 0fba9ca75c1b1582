//! Baseline against several scripted "LLM" trials, with the cross-trial
//! statistics and report files written to a temporary directory.
//!
//! ```bash
//! cargo run --release -p windcommit --example trials_comparison
//! ```

use windcommit::agents::{render_agent2_reply, AuditLog, Provenance, ScriptedBackend};
use windcommit::cli::BUNDLED_DAY;
use windcommit::io::{parse_day_csv, write_report, RunOutput};
use windcommit::simulator::{compare_trials, run_simulation, Mode, SimulationConfig};

pub fn run() -> windcommit::Result<()> {
    let cfg = SimulationConfig { total_steps: 24, ..SimulationConfig::default() };
    let day = parse_day_csv(BUNDLED_DAY)?;
    let mut audit = AuditLog::new();
    let baseline = run_simulation(&cfg, &day, None, &mut audit)?;

    // each trial's mock leans a different way
    let proposals: [[f64; 5]; 3] =
        [[0.1, 0.3, 0.4, 0.15, 0.05], [0.05, 0.2, 0.4, 0.25, 0.1], [0.02, 0.18, 0.6, 0.18, 0.02]];
    let llm_cfg = SimulationConfig { mode: Mode::Llm, ..cfg.clone() };
    let mut trials = Vec::new();
    for (i, p) in proposals.iter().enumerate() {
        audit.trial = Some(i);
        let mut mock = ScriptedBackend::new(vec![render_agent2_reply(p)])?;
        let mut r = run_simulation(&llm_cfg, &day, Some(&mut mock), &mut audit)?;
        r.trial = Some(i);
        println!("trial {i}: {:.3} M$, {} llm steps", r.totals.cost / 1e6, r.count(Provenance::Llm));
        trials.push(r);
    }

    let c = compare_trials(&baseline, &trials).expect("trials present");
    println!("baseline {:.3} M$", c.baseline.cost / 1e6);
    println!(
        "trials mean {:.3} M$, std {:.3}, CV {:.3}%, below baseline {:.0}%",
        c.cost.mean / 1e6,
        c.cost.std / 1e6,
        100.0 * c.cost.cv,
        100.0 * c.success_rate
    );
    println!("load curtailment mean {:.3} GWh (baseline {:.3})", c.load_curtail.mean, c.baseline.load_curtail_gwh);

    let dir = std::env::temp_dir().join(format!("windcommit-trials-{}", std::process::id()));
    let out = RunOutput { config: &cfg, data: &day, primary: &baseline, trials: &trials, audit_log: None };
    let files = write_report(&out, &dir)?;
    println!("wrote {} and {}", files.report.display(), files.distribution.as_ref().map_or(String::new(), |p| p.display().to_string()));
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
