//! The two-agent refinement step with scripted replies: an accepted
//! proposal, a proposal that fails validation, and the offline fallback.
//!
//! ```bash
//! cargo run -p windcommit --example agent_pipeline
//! ```

use windcommit::agents::{
    build_agent1_prompt, compute_error_stats, refine_probabilities, AuditLog, NullBackend, RefineContext,
    RefineOptions, ScriptedBackend,
};
use windcommit::scenario_tree::{ProbabilityVector, QuantileSet};

pub fn run() -> windcommit::Result<()> {
    let actual = [7.9, 8.4, 9.6, 10.2, 9.1, 7.7];
    let forecast = [8.2, 8.9, 9.9, 10.0, 9.8, 8.5];
    let q = QuantileSet::default();
    let ctx = RefineContext {
        stats: compute_error_stats(&actual, &forecast)?,
        history: actual.iter().copied().zip(forecast).collect(),
        defaults: ProbabilityVector::default_for(&q),
        quantiles: q,
        step: Some(5),
    };
    println!("mu {:.4} GW, sigma {:.4} GW over {} points", ctx.stats.mu, ctx.stats.sigma, ctx.stats.count);
    let prompt = build_agent1_prompt(&ctx.stats, &ctx.quantiles, &ctx.defaults, &ctx.history);
    println!("agent 1 prompt: {} lines, starts {:?}", prompt.lines().count(), prompt.lines().next().unwrap_or(""));

    let opts = RefineOptions::default();
    let analysis = "Errors are mostly negative, so shift weight down. \
                    Therefore the prob_new finally selected: 0.1, 0.3, 0.4, 0.15, 0.05";
    let extraction = "{ 'prob_new': [0.1, 0.3, 0.4, 0.15, 0.05] }";
    let mut good = ScriptedBackend::new(vec![analysis.into(), extraction.into()])?;
    let mut log = AuditLog::new();
    let r = refine_probabilities(&mut good, &ctx, &opts, &mut log);
    println!("scripted: {} after {} attempt(s): {}", r.provenance, r.attempts, r.probabilities);

    let mut bad = ScriptedBackend::new(vec!["the prob_new finally selected: 0.5, 0.5, 0.5, 0.5, 0.5".into()])?;
    let r = refine_probabilities(&mut bad, &ctx, &opts, &mut log);
    println!("invalid:  {} after {} attempt(s): {}", r.provenance, r.attempts, r.probabilities);

    let r = refine_probabilities(&mut NullBackend, &ctx, &opts, &mut log);
    println!("offline:  {} {}", r.provenance, r.probabilities);

    println!("audit log: {} records", log.records().len());
    for rec in log.records().iter().filter(|r| r.agent == 0) {
        println!("  exchange {}: {}", rec.exchange, rec.payload);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
