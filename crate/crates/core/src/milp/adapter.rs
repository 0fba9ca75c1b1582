//! Runs an external MILP executable through LP-file interchange.
//!
//! The command line is a program plus arguments in which `{lp}` and `{sol}`
//! are replaced by the problem and solution paths. The executable must write
//! a solution file in the format of [`lp_format::write_solution`].

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::lp_format;
use super::{MilpProblem, MilpSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalSolver {
    pub program: PathBuf,
    pub args: Vec<String>,
    /// Directory for interchange files; a temporary directory when unset.
    #[serde(default)]
    pub work_dir: Option<PathBuf>,
}

impl ExternalSolver {
    pub fn new(program: impl Into<PathBuf>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            program: program.into(),
            args: args.into_iter().map(Into::into).collect(),
            work_dir: None,
        }
    }

    pub fn solve(&self, problem: &MilpProblem) -> Result<MilpSolution> {
        external_solver_adapter(problem, self)
    }
}

pub fn external_solver_adapter(problem: &MilpProblem, solver: &ExternalSolver) -> Result<MilpSolution> {
    problem.validate()?;
    let dir = match &solver.work_dir {
        Some(d) => d.clone(),
        None => std::env::temp_dir(),
    };
    let stem = format!("windcommit-{}-{}", std::process::id(), unique());
    let lp_path = dir.join(format!("{stem}.lp"));
    let sol_path = dir.join(format!("{stem}.sol"));
    std::fs::write(&lp_path, lp_format::write_lp(problem)).map_err(|e| Error::io(&lp_path, e))?;
    let result = run(problem, solver, &lp_path, &sol_path);
    let _ = std::fs::remove_file(&lp_path);
    let _ = std::fs::remove_file(&sol_path);
    result
}

fn unique() -> u64 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    COUNTER.fetch_add(1, Ordering::Relaxed)
}

fn run(problem: &MilpProblem, solver: &ExternalSolver, lp_path: &Path, sol_path: &Path) -> Result<MilpSolution> {
    let args: Vec<String> = solver
        .args
        .iter()
        .map(|a| {
            a.replace("{lp}", &lp_path.to_string_lossy())
                .replace("{sol}", &sol_path.to_string_lossy())
        })
        .collect();
    let output = Command::new(&solver.program).args(&args).output().map_err(|e| Error::Adapter {
        message: format!("could not start `{}`: {e}", solver.program.display()),
        output: String::new(),
    })?;
    let transcript = format!(
        "{}{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    if !output.status.success() {
        return Err(Error::Adapter {
            message: format!("`{}` exited with {}", solver.program.display(), output.status),
            output: transcript,
        });
    }
    let text = std::fs::read_to_string(sol_path).map_err(|e| Error::Adapter {
        message: format!("no solution file at {}: {e}", sol_path.display()),
        output: transcript.clone(),
    })?;
    lp_format::read_solution(problem, &text).map_err(|e| Error::Adapter {
        message: format!("unreadable solution file: {e}"),
        output: transcript,
    })
}
