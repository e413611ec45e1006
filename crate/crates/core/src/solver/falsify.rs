//! Randomized falsification: integrate from sampled initial functions and
//! check that the observed behaviour is compatible with a verdict.
//!
//! A finite simulation samples only some initial times and initial
//! functions, so a clean report never proves a verdict; a violation refutes
//! it (up to discretisation error).

use super::{check_positivity, estimate_decay, fundamental_function, integrate, Trajectory};
use crate::catalog::{ext_float, Conclusion, Verdict};
use crate::dde_model::{Equation, InitialCondition};
use crate::funcmodel::TimeFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default seed for reproducible falsification runs.
pub const DEFAULT_SEED: u64 = 0x5EED_DE1A;

/// Minimum relative envelope drop `ν · (fit window length)` accepted as decay.
pub const MIN_DECAY_DROP: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsifyConfig {
    pub trials: usize,
    /// Integration horizon past `t0`; `None` picks `max(60, 30 τ_max)`.
    pub horizon: Option<f64>,
    /// Grid step; `None` picks `min(0.01, smallest delay / 4)`.
    pub step: Option<f64>,
    pub seed: u64,
    /// Admissible range of initial values (validity range of a nonlinear
    /// equation); `None` samples amplitudes log-uniformly in `[1e-2, 1e2]`.
    pub value_range: Option<(f64, f64)>,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        FalsifyConfig { trials: 8, horizon: None, step: None, seed: DEFAULT_SEED, value_range: None }
    }
}

/// Result of one simulated trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub index: usize,
    pub initial_id: String,
    /// Fitted decay rate, when a fit was attempted.
    #[serde(with = "ext_float::option")]
    pub nu: Option<f64>,
    #[serde(with = "ext_float")]
    pub max_abs: f64,
    #[serde(with = "ext_float")]
    pub psi_sup: f64,
    pub passed: bool,
    pub reason: String,
    /// Kept only for violating trials.
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub test_id: String,
    pub conclusion: Conclusion,
    pub seed: u64,
    pub horizon: f64,
    pub step: f64,
    pub trials: Vec<TrialOutcome>,
    pub violations: usize,
    pub notes: Vec<String>,
}

impl FalsificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    pub fn violating(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.trials.iter().filter(|t| !t.passed)
    }
}

fn smallest_positive_lag(eq: &Equation) -> Option<f64> {
    let lags: Vec<&TimeFunction> = match eq {
        Equation::Linear(l) => l.terms.iter().map(|t| &t.delay.lag).collect(),
        Equation::Nonlinear(n) => n.terms.iter().map(|t| &t.delay.lag).collect(),
    };
    let t0 = eq.t0();
    let scan = crate::funcmodel::ScanConfig::for_lag_bound(eq.tau_max());
    lags.into_iter()
        .map(|l| crate::funcmodel::inf_val(l, crate::funcmodel::Window::halfline(t0), &scan).value)
        .filter(|&v| v > 0.0)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
}

/// Resolved horizon and step for an equation.
pub fn resolve_grid(eq: &Equation, cfg: &FalsifyConfig) -> (f64, f64) {
    let horizon = cfg.horizon.unwrap_or_else(|| (30.0 * eq.tau_max()).max(60.0));
    let step = cfg.step.unwrap_or_else(|| {
        let lag = smallest_positive_lag(eq).unwrap_or(f64::INFINITY);
        (lag / 4.0).min(0.01)
    });
    (horizon, step)
}

/// Samples `cfg.trials` initial functions: constants, sinusoids and
/// piecewise-constant functions with sign changes.
pub fn sample_initial_conditions(eq: &Equation, cfg: &FalsifyConfig) -> Vec<(String, InitialCondition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let t0 = eq.t0();
    let span = eq.tau_max().max(0.5);
    (0..cfg.trials)
        .map(|k| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let (centre, amp) = match cfg.value_range {
                Some((a, b)) => {
                    let c = rng.gen_range(a..=b);
                    (c, (b - c).min(c - a).max(0.0))
                }
                None => (0.0, 10f64.powf(rng.gen_range(-2.0..=2.0))),
            };
            match k % 3 {
                0 => {
                    let c = if cfg.value_range.is_some() { centre } else { sign * amp };
                    (format!("constant({c:.6})"), InitialCondition::constant(c))
                }
                1 => {
                    let omega = rng.gen_range(0.5..3.0) * std::f64::consts::PI / span;
                    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                    let f = TimeFunction::sinusoid(centre, sign * amp, omega, phase);
                    (
                        format!("sinusoid({centre:.4} + {:.4} sin({omega:.4} t + {phase:.4}))", sign * amp),
                        InitialCondition::from_function(f, t0),
                    )
                }
                _ => {
                    let pieces = 4;
                    let period = span;
                    let table: Vec<(f64, f64)> = (0..pieces)
                        .map(|i| {
                            let alt = if i % 2 == 0 { sign } else { -sign };
                            let level = rng.gen_range(0.3..=1.0);
                            (i as f64 * period / pieces as f64, centre + alt * amp * level)
                        })
                        .collect();
                    let f = TimeFunction::piecewise_periodic(period, &table)
                        .expect("sampled table is well ordered");
                    (format!("piecewise(amplitude {amp:.4})"), InitialCondition::from_function(f, t0))
                }
            }
        })
        .collect()
}

/// Falsification with sampled initial functions.
pub fn falsify(eq: &Equation, verdict: &Verdict, cfg: &FalsifyConfig) -> FalsificationReport {
    let ics = sample_initial_conditions(eq, cfg);
    falsify_with(eq, verdict, &ics, cfg)
}

/// Falsification with explicit initial functions.
pub fn falsify_with(
    eq: &Equation,
    verdict: &Verdict,
    ics: &[(String, InitialCondition)],
    cfg: &FalsifyConfig,
) -> FalsificationReport {
    let (horizon, step) = resolve_grid(eq, cfg);
    let mut report = FalsificationReport {
        test_id: verdict.test_id.clone(),
        conclusion: verdict.conclusion,
        seed: cfg.seed,
        horizon,
        step,
        trials: Vec::new(),
        violations: 0,
        notes: Vec::new(),
    };
    match verdict.conclusion {
        Conclusion::Inconclusive => {
            report.notes.push("inconclusive verdict: nothing to falsify".into());
            return report;
        }
        Conclusion::Nonoscillatory => {
            let outcome = match eq {
                Equation::Linear(l) => {
                    match fundamental_function(l, l.t0, l.t0 + horizon, step) {
                        Ok(traj) => {
                            let p = check_positivity(&traj);
                            let mut o = TrialOutcome {
                                index: 0,
                                initial_id: "fundamental".into(),
                                nu: None,
                                max_abs: traj.metadata.max_abs,
                                psi_sup: 1.0,
                                passed: p.positive,
                                reason: match p.first_sign_change {
                                    Some(t) => format!("fundamental function changes sign at t = {t:.6}"),
                                    None => "fundamental function stays positive".into(),
                                },
                                trajectory: None,
                            };
                            if !o.passed {
                                o.trajectory = Some(traj);
                            }
                            o
                        }
                        Err(e) => failed_trial(0, "fundamental", e.to_string()),
                    }
                }
                Equation::Nonlinear(_) => {
                    report.notes.push("nonoscillation is checked on linear equations only".into());
                    return report;
                }
            };
            report.violations = usize::from(!outcome.passed);
            report.trials.push(outcome);
            report.notes.push("a finite simulation refutes but never proves a verdict".into());
            return report;
        }
        _ => {}
    }
    let conclusion = verdict.conclusion;
    let t_end = eq.t0() + horizon;
    let mut outcomes: Vec<Option<TrialOutcome>> = vec![None; ics.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = outcomes
            .iter_mut()
            .zip(ics.iter().enumerate())
            .map(|(slot, (k, (id, ic)))| {
                scope.spawn(move || {
                    *slot = Some(run_trial(eq, conclusion, k, id, ic, t_end, step));
                })
            })
            .collect();
        for h in handles {
            h.join().expect("falsification trial panicked");
        }
    });
    report.trials = outcomes.into_iter().map(|o| o.expect("trial completed")).collect();
    report.violations = report.trials.iter().filter(|t| !t.passed).count();
    report.notes.push("a finite simulation refutes but never proves a verdict".into());
    report
}

fn failed_trial(index: usize, id: &str, reason: String) -> TrialOutcome {
    TrialOutcome {
        index,
        initial_id: id.to_string(),
        nu: None,
        max_abs: f64::INFINITY,
        psi_sup: f64::NAN,
        passed: false,
        reason,
        trajectory: None,
    }
}

fn run_trial(
    eq: &Equation,
    conclusion: Conclusion,
    index: usize,
    id: &str,
    ic: &InitialCondition,
    t_end: f64,
    step: f64,
) -> TrialOutcome {
    let traj = match integrate(eq, ic, t_end, step) {
        Ok(t) => t.with_ids("equation", id),
        Err(e) => return failed_trial(index, id, e.to_string()),
    };
    let psi_sup = traj.metadata.psi_sup;
    let max_abs = traj.metadata.max_abs;
    let (passed, nu, reason) = if conclusion == Conclusion::BoundedSolutions {
        let ok = max_abs <= 10.0 * psi_sup;
        (
            ok,
            None,
            format!("max |x| = {max_abs:.4e} against 10 sup|ψ| = {:.4e}", 10.0 * psi_sup),
        )
    } else {
        match estimate_decay(&traj, 0.5) {
            Ok(fit) if fit.zero_tail => (true, Some(f64::INFINITY), "solution vanishes".into()),
            Ok(fit) => {
                let drop = fit.nu * (fit.fit_window[1] - fit.fit_window[0]);
                (
                    fit.nu > 0.0 && drop >= MIN_DECAY_DROP,
                    Some(fit.nu),
                    format!("fitted ν = {:.4e} over [{:.3}, {:.3}]", fit.nu, fit.fit_window[0], fit.fit_window[1]),
                )
            }
            Err(e) => (false, None, e.to_string()),
        }
    };
    TrialOutcome {
        index,
        initial_id: id.to_string(),
        nu,
        max_abs,
        psi_sup,
        passed,
        reason,
        trajectory: if passed { None } else { Some(traj) },
    }
}
