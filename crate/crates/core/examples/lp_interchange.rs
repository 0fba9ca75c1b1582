//! Writes a window MILP as an LP file, reads it back, and solves it through
//! the external-solver adapter.
//!
//! The adapter runs `WINDCOMMIT_EXTERNAL_SOLVER` when set (any program that
//! accepts `{lp}` and `{sol}` paths in its arguments and writes the same
//! solution format), otherwise the `windcommit` binary next to this example.
//!
//! ```bash
//! cargo build -p windcommit && cargo run -p windcommit --example lp_interchange
//! ```

use std::path::PathBuf;

use windcommit::milp::adapter::ExternalSolver;
use windcommit::milp::lp_format::{read_lp, read_solution, write_lp, write_solution};
use windcommit::milp::{solve_milp, MilpOptions};
use windcommit::scenario_tree::ProbabilityVector;
use windcommit::uc::{build_milp, reference_generators, RampMode, UcInstance, DEFAULT_VOLL};

fn sibling_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    // target/<profile>/examples/<name> or target/<profile>/deps/<name>
    let profile = exe.parent()?.parent()?;
    let bin = profile.join(format!("windcommit{}", std::env::consts::EXE_SUFFIX));
    bin.exists().then_some(bin)
}

pub fn run() -> windcommit::Result<()> {
    let generators = reference_generators();
    let instance = UcInstance {
        initial_commitment: vec![true, false, false],
        initial_output: vec![6.0, 0.0, 0.0],
        generators,
        dt: 0.5,
        voll: DEFAULT_VOLL,
        demand: vec![18.0, 20.0, 23.0],
        wind: vec![vec![6.0, 5.0, 4.0], vec![6.0, 7.5, 9.0]],
        probabilities: ProbabilityVector::new(vec![0.6, 0.4])?,
        nonanticipativity_stages: 1,
        ramp_mode: RampMode::StartupAware,
    };
    let (problem, _) = build_milp(&instance)?;
    let text = write_lp(&problem);
    println!("{} bytes of LP text; first lines:", text.len());
    for line in text.lines().take(4) {
        println!("  {line}");
    }

    let model = read_lp(&text)?;
    let internal = solve_milp(&model.problem, &MilpOptions::default())?;
    println!("internal: {} objective {:.2}", internal.status.as_str(), internal.objective);
    let sol_text = write_solution(&model.problem, &internal);
    let back = read_solution(&model.problem, &sol_text)?;
    println!("solution file round trip: {} values", back.values.len());

    let program = std::env::var_os("WINDCOMMIT_EXTERNAL_SOLVER").map(PathBuf::from).or_else(sibling_binary);
    match program {
        Some(program) => {
            let solver = ExternalSolver::new(&program, ["solve", "--lp-file", "{lp}", "--solution-out", "{sol}"]);
            let external = solver.solve(&problem)?;
            println!(
                "external ({}): {} objective {:.2}",
                program.display(),
                external.status.as_str(),
                external.objective
            );
        }
        None => println!("no external solver found; build the windcommit binary first"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> windcommit::Result<()> {
    run()
}
