//! Builds the five-branch AR(1) error tree, compares the fixed and midpoint
//! branch probabilities, and turns a point forecast into scenario wind.
//!
//! ```bash
//! cargo run -p windcommit --example scenario_tree
//! ```

use windcommit::scenario_tree::{
    branch_probabilities, build_error_tree, inverse_normal_cdf, ArParams, ErrorMode, ProbabilityVector, QuantileSet,
};

pub fn run() -> windcommit::Result<()> {
    let q = QuantileSet::default();
    let tree = build_error_tree(&q, ArParams::default(), 6)?;
    print!("{}", tree.render());

    println!("fixed    {}", ProbabilityVector::default_for(&q));
    println!("midpoint {}", branch_probabilities(&q));
    for &level in q.levels() {
        println!("  z({level}) = {:+.6}", inverse_normal_cdf(level, 0.0, 1.0)?);
    }

    let forecast = [9.0, 10.5, 12.0, 12.5, 11.0, 8.0];
    let wind = tree.apply_errors(&forecast, 20.0, ErrorMode::PerUnit)?;
    println!("scenario wind, GW:");
    for (n, row) in wind.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|w| format!("{w:6.2}")).collect();
        println!("  q={:<5}{}", q.levels()[n], cells.join(""));
    }

    // a wider, asymmetric tree
    let skewed = QuantileSet::new(vec![0.05, 0.3, 0.5, 0.6, 0.95])?;
    let t = build_error_tree(&skewed, ArParams::new(0.9, 0.2)?, 4)?.with_probabilities(branch_probabilities(&skewed))?;
    print!("{}", t.render());
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
