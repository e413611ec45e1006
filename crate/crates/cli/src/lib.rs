//! Batch front end: reads a declarative configuration, runs certification,
//! simulation or falsification, and renders reports and CSV trajectories.

pub mod config;
pub mod report;

use anyhow::{anyhow, Context, Result};
use config::{AnalysisConfig, Format, Resolved, TestSelection};
use delaycert_core::catalog::{
    run_all_with, run_selected, verdict_from_error, CatalogError, Conclusion, Verdict, VerdictSoundness,
};
use delaycert_core::dde_model::{Equation, InitialCondition};
use delaycert_core::funcmodel::TimeFunction;
use delaycert_core::linearize::{default_bounds, evaluate_linearization, ratio_ranges, RatioRange};
use delaycert_core::solver::{
    compute_phi, estimate_decay, falsify, integrate, resolve_grid, FalsificationReport, FalsifyConfig,
    DEFAULT_SEED,
};
use report::{Generated, Report, SimulationSummary, Summary, SCHEMA_VERSION};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Process exit statuses.
pub mod exit {
    /// Analysis: some sound verdict certifies stability. Simulation and
    /// verification: completed without violations.
    pub const OK: i32 = 0;
    pub const CONFIG_ERROR: i32 = 1;
    pub const SOLVER_ERROR: i32 = 2;
    /// No sound stability certificate was found.
    pub const INCONCLUSIVE: i32 = 3;
    pub const FALSIFIED: i32 = 4;
}

/// Command-line overrides shared by the configuration-driven commands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub tests: Option<String>,
    pub seed: Option<u64>,
    pub csv_dir: Option<PathBuf>,
    pub format: Option<Format>,
    /// Initial function for `simulate`.
    pub initial: Option<String>,
}

/// Result of one command: exit status, rendered output and the report.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    /// Text for standard output.
    pub output: String,
    /// Diagnostic for standard error.
    pub error: Option<String>,
    pub report: Option<Report>,
}

impl Outcome {
    fn failure(exit_code: i32, err: anyhow::Error) -> Outcome {
        Outcome { exit_code, output: String::new(), error: Some(format!("{err:#}")), report: None }
    }

    fn from_report(report: Report, format: Format) -> Outcome {
        let output = match format {
            Format::Json => report.to_json(),
            Format::Markdown => report.to_markdown(),
        };
        Outcome { exit_code: report.summary.exit_code, output, error: None, report: Some(report) }
    }
}

/// Loads and resolves a configuration file, applying the overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Resolved> {
    let mut cfg = AnalysisConfig::load(path)?;
    if let Some(t) = &overrides.tests {
        cfg.tests = TestSelection::from_flag(t);
    }
    if let Some(seed) = overrides.seed {
        cfg.solver.seed = Some(seed);
    }
    if let Some(f) = overrides.format {
        cfg.output.format = f;
    }
    if let Some(init) = &overrides.initial {
        cfg.simulate.initial = Some(init.clone());
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.resolve(&base)
}

fn with_config(path: &Path, overrides: &Overrides, run: impl FnOnce(&Resolved) -> Outcome) -> Outcome {
    match load_config(path, overrides) {
        Ok(res) => run(&res),
        Err(e) => Outcome::failure(exit::CONFIG_ERROR, e),
    }
}

pub fn cmd_analyze(path: &Path, overrides: &Overrides) -> Outcome {
    with_config(path, overrides, |res| match analyze(res) {
        Ok(report) => Outcome::from_report(report, res.config.output.format),
        Err(e) => Outcome::failure(exit::CONFIG_ERROR, e),
    })
}

pub fn cmd_simulate(path: &Path, overrides: &Overrides) -> Outcome {
    with_config(path, overrides, |res| match simulate(res, overrides.csv_dir.as_deref()) {
        Ok(report) => Outcome::from_report(report, res.config.output.format),
        Err(e) => Outcome::failure(e.code, e.error),
    })
}

pub fn cmd_verify(path: &Path, overrides: &Overrides) -> Outcome {
    with_config(path, overrides, |res| match verify(res, overrides.csv_dir.as_deref()) {
        Ok(report) => Outcome::from_report(report, res.config.output.format),
        Err(e) => Outcome::failure(e.code, e.error),
    })
}

/// `phi --tau X`, or Φ at the largest lag of the configured equation.
pub fn cmd_phi(path: Option<&Path>, tau: Option<f64>, overrides: &Overrides) -> Outcome {
    let tau = match (tau, path) {
        (Some(t), _) => t,
        (None, Some(p)) => match load_config(p, overrides) {
            Ok(res) => res.equation.tau_max(),
            Err(e) => return Outcome::failure(exit::CONFIG_ERROR, e),
        },
        (None, None) => return Outcome::failure(exit::CONFIG_ERROR, anyhow!("phi needs --tau or a configuration")),
    };
    match compute_phi(tau) {
        Ok(v) => Outcome { exit_code: exit::OK, output: format!("{v}\n"), error: None, report: None },
        Err(e) => Outcome::failure(exit::SOLVER_ERROR, e.into()),
    }
}

/// Certification results before rendering.
struct Analysis {
    verdicts: Vec<Verdict>,
    global: Option<Verdict>,
    ranges: Vec<RatioRange>,
}

fn run_analysis(res: &Resolved) -> Result<Analysis> {
    let opts = res.run_options();
    let ids: Vec<&str> = res.tests.iter().map(String::as_str).collect();
    let mut analysis = match &res.equation {
        Equation::Linear(eq) => {
            let verdicts = if ids.is_empty() {
                run_all_with(eq, &opts)
            } else {
                run_selected(eq, &ids, &opts).map_err(|e| anyhow!("tests: {e}"))?
            };
            Analysis { verdicts, global: None, ranges: Vec::new() }
        }
        Equation::Nonlinear(eq) => {
            let bounds = match res.config.linearize.bounds {
                Some([a, b]) => (a, b),
                None => default_bounds(eq),
            };
            let ranges = ratio_ranges(eq, bounds).map_err(|e| anyhow!("linearize: {e}"))?;
            match evaluate_linearization(eq, &ranges, &ids, &opts) {
                Ok((global, verdicts)) => Analysis { verdicts, global: Some(global), ranges },
                Err(e @ CatalogError::HeuristicBoundsOnly(_)) => {
                    Analysis { verdicts: Vec::new(), global: Some(verdict_from_error("linearization", e)), ranges }
                }
                Err(e) => return Err(anyhow!("linearize: {e}")),
            }
        }
    };
    if let Some(inject) = &res.config.debug.inject_verdict {
        let target = match &mut analysis.global {
            Some(g) => g,
            None => match analysis.verdicts.iter_mut().find(|v| v.test_id == inject.test) {
                Some(v) => v,
                None => {
                    analysis.verdicts.push(Verdict::not_applicable(&inject.test, String::new()));
                    analysis.verdicts.last_mut().expect("just pushed")
                }
            },
        };
        target.applicable = true;
        target.conclusion = inject.conclusion;
        target.soundness = VerdictSoundness::Sound;
        target.notes.push("conclusion injected by debug.inject_verdict".into());
    }
    Ok(analysis)
}

/// Verdicts whose conclusion the exit status and falsification rely on.
fn decisive(a: &Analysis) -> Vec<&Verdict> {
    match &a.global {
        Some(g) => vec![g],
        None => a.verdicts.iter().collect(),
    }
}

fn summarize(a: &Analysis) -> Summary {
    let sound: Vec<&Verdict> = decisive(a)
        .into_iter()
        .filter(|v| v.soundness == VerdictSoundness::Sound && v.conclusion != Conclusion::Inconclusive)
        .collect();
    let strongest = sound.iter().map(|v| v.conclusion).max_by_key(|c| c.strength());
    let certified_by: Vec<String> =
        sound.iter().filter(|v| v.conclusion.is_stability()).map(|v| v.test_id.clone()).collect();
    let (exit_code, status) = if certified_by.is_empty() {
        (exit::INCONCLUSIVE, "no sound stability certificate".to_string())
    } else {
        (exit::OK, format!("stability certified ({})", strongest.expect("nonempty")))
    };
    Summary { exit_code, status, strongest_sound: strongest, certified_by, falsification_violations: 0 }
}

fn base_report(res: &Resolved, command: &str, a: Analysis, summary: Summary) -> Report {
    Report {
        schema: SCHEMA_VERSION,
        command: command.to_string(),
        equation_id: res.equation_id.clone(),
        equation: res.equation.clone(),
        tests: res.tests.clone(),
        verdicts: a.verdicts,
        global: a.global,
        ratio_ranges: a.ranges,
        falsification: Vec::new(),
        simulation: None,
        csv_files: Vec::new(),
        summary,
        generated: Generated::now(),
    }
}

/// Runs the configured tests and builds the report.
pub fn analyze(res: &Resolved) -> Result<Report> {
    let a = run_analysis(res)?;
    let summary = summarize(&a);
    Ok(base_report(res, "analyze", a, summary))
}

/// An error paired with the exit status it maps to.
#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub error: anyhow::Error,
}

impl CommandError {
    fn config(error: anyhow::Error) -> Self {
        CommandError { code: exit::CONFIG_ERROR, error }
    }
}

fn falsify_config(res: &Resolved) -> FalsifyConfig {
    let s = &res.config.solver;
    let value_range = match (&res.equation, res.config.linearize.bounds) {
        (Equation::Nonlinear(_), Some([a, b])) if a.is_finite() && b.is_finite() => Some((a, b)),
        _ => None,
    };
    FalsifyConfig {
        trials: s.trials.unwrap_or(8),
        horizon: s.horizon,
        step: s.step,
        seed: s.seed.unwrap_or(DEFAULT_SEED),
        value_range,
    }
}

fn csv_dir(res: &Resolved, flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => res.csv_dir(),
    }
}

fn write_csv(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Integrates the configured equation from the configured initial function,
/// writes `trajectory.csv` and fits a decay rate.
pub fn simulate(res: &Resolved, csv_flag: Option<&Path>) -> Result<Report, CommandError> {
    let expr = res.config.simulate.initial.clone().unwrap_or_else(|| "const(1)".to_string());
    let psi = TimeFunction::parse(&expr)
        .map_err(|e| CommandError::config(anyhow!("simulate.initial: {e}")))?;
    let t0 = res.equation.t0();
    let ic = InitialCondition::from_function(psi, t0);
    let (horizon, step) = resolve_grid(&res.equation, &falsify_config(res));
    let traj = integrate(&res.equation, &ic, t0 + horizon, step)
        .map_err(|e| CommandError { code: exit::SOLVER_ERROR, error: e.into() })?
        .with_ids(&res.equation_id, &expr);
    let path = write_csv(&csv_dir(res, csv_flag), "trajectory.csv", &traj.to_csv()).map_err(CommandError::config)?;
    let (decay, decay_error) = match estimate_decay(&traj, 0.5) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = Summary {
        exit_code: exit::OK,
        status: "simulation completed".into(),
        strongest_sound: None,
        certified_by: Vec::new(),
        falsification_violations: 0,
    };
    let empty = Analysis { verdicts: Vec::new(), global: None, ranges: Vec::new() };
    let mut report = base_report(res, "simulate", empty, summary);
    report.simulation = Some(SimulationSummary {
        initial: expr,
        step,
        horizon,
        points: traj.count(),
        max_abs: traj.metadata.max_abs,
        final_value: *traj.values.last().expect("nonempty trajectory"),
        decay,
        decay_error,
    });
    report.csv_files.push(path.display().to_string());
    Ok(report)
}

/// Analyses, then tries to falsify every conclusive verdict by simulation.
/// Offending trajectories are exported as CSV.
pub fn verify(res: &Resolved, csv_flag: Option<&Path>) -> Result<Report, CommandError> {
    let a = run_analysis(res).map_err(CommandError::config)?;
    let mut summary = summarize(&a);
    let cfg = falsify_config(res);
    // The simulated trials depend only on the equation, the configuration
    // and the claimed conclusion, so each conclusion is simulated once.
    let mut by_conclusion: HashMap<Conclusion, FalsificationReport> = HashMap::new();
    let mut reports = Vec::new();
    for v in decisive(&a).into_iter().filter(|v| v.conclusion != Conclusion::Inconclusive) {
        let base = by_conclusion
            .entry(v.conclusion)
            .or_insert_with(|| falsify(&res.equation, v, &cfg));
        let mut r = base.clone();
        r.test_id = v.test_id.clone();
        reports.push(r);
    }
    let mut csv_files = Vec::new();
    let dir = csv_dir(res, csv_flag);
    for r in &reports {
        for t in r.violating() {
            if let Some(traj) = &t.trajectory {
                let name = format!("violation_{}_trial{}.csv", r.test_id, t.index);
                let path = write_csv(&dir, &name, &traj.to_csv()).map_err(CommandError::config)?;
                csv_files.push(path.display().to_string());
            }
        }
    }
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    summary.falsification_violations = violations;
    if violations > 0 {
        summary.exit_code = exit::FALSIFIED;
        summary.status = format!("{violations} falsification violation(s)");
    }
    let mut report = base_report(res, "verify", a, summary);
    report.falsification = reports;
    report.csv_files = csv_files;
    Ok(report)
}
