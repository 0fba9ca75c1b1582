//! A full 48-step baseline day on the bundled synthetic data, printed step
//! by step.
//!
//! ```bash
//! cargo run --release -p windcommit --example rolling_day
//! ```

use windcommit::agents::AuditLog;
use windcommit::cli::BUNDLED_DAY;
use windcommit::io::{parse_day_csv, render_table_row};
use windcommit::simulator::{run_simulation, SimulationConfig};

pub fn run() -> windcommit::Result<()> {
    let cfg = SimulationConfig::default();
    let day = parse_day_csv(BUNDLED_DAY)?;
    let report = run_simulation(&cfg, &day, None, &mut AuditLog::new())?;

    println!(" step  demand    wind  commit      G1     G2     G3   lcur   wcur   cost M$");
    for s in &report.steps {
        let commit: String = s.commitment.iter().map(|&on| if on { '1' } else { '0' }).collect();
        println!(
            "{:5} {:7.2} {:7.2}  {:>6} {:7.2}{:7.2}{:7.2} {:6.2} {:6.2} {:9.3}",
            s.step, s.demand, s.wind, commit, s.output[0], s.output[1], s.output[2], s.load_curtail, s.wind_curtail,
            s.cost / 1e6
        );
    }
    println!("cost M$, load curtailment GWh, wind curtailment GWh: {}", render_table_row(&report.totals));
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
