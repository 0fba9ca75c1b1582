//! The `windcommit` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data, configuration or credentials,
//! 3 solver failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::agents::{AuditLog, ChatBackend, HttpChatBackend, ScriptedBackend};
use crate::error::{Error, Result};
use crate::io::{
    generate_synthetic_day, load_config, load_day_csv, parse_day_csv, render_table_row, usd_to_musd, write_day_csv,
    write_report, DayData, RunOutput,
};
use crate::milp::lp_format::{read_lp, write_solution};
use crate::milp::{solve_milp, MilpOptions, MilpStatus};
use crate::scenario_tree::{branch_probabilities, build_error_tree, ArParams, ProbabilityVector, QuantileSet};
use crate::simulator::{run_simulation, trial_seed, Mode, SimulationConfig, SimulationReport};
use crate::uc::{build_milp, check_feasibility, evaluate_solution, UcInstance};

/// The synthetic day shipped with the crate (seed 7, default configuration).
pub const BUNDLED_DAY: &str = include_str!("../data/synthetic_day.csv");

#[derive(Debug, Parser)]
#[command(name = "windcommit", version, about = "Stochastic unit commitment under wind forecast uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Baseline,
    Llm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Fixed,
    Midpoint,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the error tree for a quantile set.
    Tree {
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.5,0.9,0.99")]
        quantiles: Vec<f64>,
        #[arg(long, default_value_t = 1.2)]
        phi: f64,
        #[arg(long, default_value_t = 0.14)]
        eps_c: f64,
        /// Stages per branch, the first one error-free.
        #[arg(long, default_value_t = 8)]
        stages: usize,
        #[arg(long, value_enum, default_value = "fixed")]
        rule: RuleArg,
    },
    /// Solve an LP file or a JSON unit-commitment instance.
    Solve {
        #[arg(long, conflicts_with = "instance", required_unless_present = "instance")]
        lp_file: Option<PathBuf>,
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Where to write the solution; stdout when omitted.
        #[arg(long)]
        solution_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        gap: f64,
        #[arg(long, default_value_t = 600.0)]
        time_limit: f64,
    },
    /// Run one simulated day.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Day CSV; the bundled synthetic day when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Replies for a scripted chat backend, separated by `---` lines.
        #[arg(long)]
        mock_script: Option<PathBuf>,
        #[arg(long, default_value = "windcommit-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run a baseline day and several refined-probability trials.
    Trials {
        /// TOML configuration; reference defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Overrides `simulation.trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Scripted replies instead of the live endpoint.
        #[arg(long)]
        mock_script: Option<PathBuf>,
        #[arg(long, default_value = "windcommit-out")]
        out: PathBuf,
        /// Base seed for per-trial backend seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `simulation.total_steps`.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Write a synthetic day CSV.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
    },
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Output goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver(_) | Error::Adapter { .. } => 3,
        _ => 2,
    }
}

fn base_config(path: Option<&Path>) -> Result<SimulationConfig> {
    match path {
        Some(p) => load_config(p),
        None => Ok(SimulationConfig::default()),
    }
}

fn load_data(path: Option<&Path>, cfg: &SimulationConfig, stderr: &mut dyn Write) -> Result<DayData> {
    let mut data = match path {
        Some(p) => load_day_csv(p)?,
        None => parse_day_csv(BUNDLED_DAY)?,
    };
    let clamped = data.clamp_wind(cfg.wind_cap);
    if clamped > 0 {
        let _ = writeln!(stderr, "warning: {clamped} wind values above {} GW were clamped", cfg.wind_cap);
    }
    Ok(data)
}

enum BackendSource {
    Script(PathBuf),
    Live,
}

impl BackendSource {
    fn pick(mock: Option<PathBuf>) -> Self {
        mock.map_or(BackendSource::Live, BackendSource::Script)
    }

    /// Fails early when the live backend has no key.
    fn check(&self, cfg: &SimulationConfig) -> Result<()> {
        match self {
            BackendSource::Script(p) => ScriptedBackend::from_file(p).map(|_| ()),
            BackendSource::Live => HttpChatBackend::from_env(cfg.agents.backend.clone(), None).map(|_| ()),
        }
    }

    fn open(&self, cfg: &SimulationConfig, seed: u64) -> Result<Box<dyn ChatBackend>> {
        Ok(match self {
            BackendSource::Script(p) => Box::new(ScriptedBackend::from_file(p)?),
            BackendSource::Live => Box::new(HttpChatBackend::from_env(cfg.agents.backend.clone(), Some(seed))?),
        })
    }
}

fn open_audit(cfg: &SimulationConfig, out: &Path) -> Result<(AuditLog, PathBuf)> {
    let path = cfg.agents.audit_log.clone().unwrap_or_else(|| out.join("audit.jsonl"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    // each run starts a fresh log
    std::fs::write(&path, "").map_err(|e| Error::io(&path, e))?;
    Ok((AuditLog::open(&path)?, path))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Tree { quantiles, phi, eps_c, stages, rule } => {
            let q = QuantileSet::new(quantiles).map_err(|e| Error::config("--quantiles", e.to_string()))?;
            let params = ArParams::new(phi, eps_c).map_err(|e| Error::config("--phi/--eps-c", e.to_string()))?;
            let probs = match rule {
                RuleArg::Fixed => ProbabilityVector::default_for(&q),
                RuleArg::Midpoint => branch_probabilities(&q),
            };
            let tree = build_error_tree(&q, params, stages)?.with_probabilities(probs)?;
            let _ = write!(out, "{}", tree.render());
            Ok(())
        }
        Command::Solve { lp_file, instance, solution_out, gap, time_limit } => {
            let options = MilpOptions { gap_tol: gap, time_limit, ..MilpOptions::default() };
            let text = if let Some(path) = lp_file {
                let src = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let model = read_lp(&src)?;
                let sol = solve_milp(&model.problem, &options)?;
                if matches!(sol.status, MilpStatus::Infeasible | MilpStatus::Unbounded) {
                    let _ = writeln!(err, "status {}", sol.status.as_str());
                }
                write_solution(&model.problem, &sol)
            } else {
                let path = instance.expect("clap requires --lp-file or --instance");
                let src = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let inst: UcInstance = serde_json::from_str(&src).map_err(|e| Error::Ingest {
                    row: Some(e.line()),
                    column: None,
                    message: e.to_string(),
                })?;
                solve_instance(&inst, &options)?
            };
            match solution_out {
                Some(p) => std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?,
                None => {
                    let _ = write!(out, "{text}");
                }
            }
            Ok(())
        }
        Command::Simulate { config, data, mode, mock_script, out: out_dir, seed, steps } => {
            let source = BackendSource::pick(mock_script.clone());
            if matches!(mode, Some(ModeArg::Llm)) && mock_script.is_none() {
                source.check(&SimulationConfig::default())?;
            }
            let mut cfg = base_config(config.as_deref())?;
            if let Some(m) = mode {
                cfg.mode = match m {
                    ModeArg::Baseline => Mode::Baseline,
                    ModeArg::Llm => Mode::Llm,
                };
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = steps {
                cfg.total_steps = n;
            }
            cfg.validate()?;
            if cfg.mode == Mode::Llm {
                source.check(&cfg)?;
            }
            let day = load_data(data.as_deref(), &cfg, err)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let (mut audit, audit_path) = open_audit(&cfg, &out_dir)?;
            let report = match cfg.mode {
                Mode::Baseline => run_simulation(&cfg, &day, None, &mut audit)?,
                Mode::Llm => {
                    let mut backend = source.open(&cfg, trial_seed(cfg.seed, 0))?;
                    run_simulation(&cfg, &day, Some(backend.as_mut()), &mut audit)?
                }
            };
            let artifacts = write_report(
                &RunOutput { config: &cfg, data: &day, primary: &report, trials: &[], audit_log: Some(&audit_path) },
                &out_dir,
            )?;
            let _ = writeln!(out, "{} mode, {} steps", report.mode, report.steps.len());
            let _ = writeln!(out, "cost M$, load curtailment GWh, wind curtailment GWh: {}", render_table_row(&report.totals));
            let _ = writeln!(out, "report: {}", artifacts.report.display());
            Ok(())
        }
        Command::Trials { config, data, trials, mock_script, out: out_dir, seed, steps } => {
            let source = BackendSource::pick(mock_script);
            let mut cfg = base_config(config.as_deref())?;
            if let Some(n) = trials {
                cfg.trials = n;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = steps {
                cfg.total_steps = n;
            }
            cfg.validate()?;
            source.check(&cfg)?;
            let day = load_data(data.as_deref(), &cfg, err)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let (mut audit, audit_path) = open_audit(&cfg, &out_dir)?;

            let base_cfg = SimulationConfig { mode: Mode::Baseline, ..cfg.clone() };
            let baseline = run_simulation(&base_cfg, &day, None, &mut audit)?;
            let llm_cfg = SimulationConfig { mode: Mode::Llm, ..cfg.clone() };
            let mut runs: Vec<SimulationReport> = Vec::with_capacity(cfg.trials);
            for trial in 0..cfg.trials {
                audit.trial = Some(trial);
                let mut backend = source.open(&cfg, trial_seed(cfg.seed, trial))?;
                let mut report = run_simulation(&llm_cfg, &day, Some(backend.as_mut()), &mut audit)?;
                report.trial = Some(trial);
                let _ = writeln!(
                    err,
                    "trial {}: {:.2} M$ ({} llm, {} fallback steps)",
                    trial + 1,
                    usd_to_musd(report.totals.cost),
                    report.count(crate::agents::Provenance::Llm),
                    report.count(crate::agents::Provenance::Fallback)
                );
                runs.push(report);
            }
            let artifacts = write_report(
                &RunOutput { config: &cfg, data: &day, primary: &baseline, trials: &runs, audit_log: Some(&audit_path) },
                &out_dir,
            )?;
            let summary = crate::simulator::compare_trials(&baseline, &runs).expect("at least one trial");
            let _ = writeln!(out, "baseline: {}", render_table_row(&baseline.totals));
            let _ = writeln!(
                out,
                "trials: mean {:.2} M$, std {:.2}, CV {:.2}%, success rate {:.0}%",
                usd_to_musd(summary.cost.mean),
                usd_to_musd(summary.cost.std),
                100.0 * summary.cost.cv,
                100.0 * summary.success_rate
            );
            let _ = writeln!(out, "report: {}", artifacts.report.display());
            Ok(())
        }
        Command::Synth { config, seed, out: path, steps } => {
            let mut cfg = base_config(config.as_deref())?;
            if let Some(n) = steps {
                cfg.total_steps = n;
            }
            cfg.validate()?;
            let day = generate_synthetic_day(seed, &cfg);
            write_day_csv(&day, &path)?;
            let _ = writeln!(out, "wrote {} steps to {}", day.len(), path.display());
            Ok(())
        }
    }
}

fn solve_instance(inst: &UcInstance, options: &MilpOptions) -> Result<String> {
    let (problem, index) = build_milp(inst)?;
    let sol = solve_milp(&problem, options)?;
    if sol.values.is_empty() {
        return Err(Error::Solver(format!("no solution: {}", sol.status.as_str())));
    }
    let decoded = index.decode(&sol.values, sol.objective);
    let costs = evaluate_solution(inst, &decoded);
    let violations: Vec<String> = check_feasibility(inst, &decoded, 1e-6).iter().map(ToString::to_string).collect();
    let doc = serde_json::json!({
        "status": sol.status.as_str(),
        "objective": sol.objective,
        "bound": sol.bound,
        "nodes": sol.nodes_explored,
        "costs": costs,
        "violations": violations,
        "solution": decoded,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Domain(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
