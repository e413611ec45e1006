//! Method-of-steps integration of delay equations, fundamental functions,
//! decay-rate fitting, positivity scans, the `Φ(τ)` quadrature and
//! randomized falsification of stability verdicts.

mod falsify;
mod integrate;

pub use falsify::{
    falsify, falsify_with, resolve_grid, sample_initial_conditions, FalsificationReport,
    FalsifyConfig, TrialOutcome, DEFAULT_SEED, MIN_DECAY_DROP,
};

use crate::catalog::ext_float;
use crate::dde_model::{validate, Equation, InitialCondition, LinearDDE, ModelError};
use integrate::{hermite, Model, Node};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("horizon {t_end} must exceed the initial time {t0}")]
    InvalidHorizon { t0: f64, t_end: f64 },
    #[error("step {step} exceeds the smallest positive delay {min_lag}")]
    StepTooLarge { step: f64, min_lag: f64 },
    #[error("solution overflowed (|x| > 1e150) at t = {t}")]
    Overflow { t: f64 },
    #[error("trajectory tail has only {points} grid points (at least 50 needed)")]
    TooShort { points: usize },
    #[error("fundamental function does not decay for tau = {0}")]
    NotDecaying(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Summary data attached to a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub max_abs: f64,
    /// Largest trapezoid defect of the stored derivative samples.
    pub residual_estimate: f64,
    /// `sup |ψ|` over the initial segment together with `|x(t0)|`.
    pub psi_sup: f64,
}

/// Solution samples on the uniform grid `start + k·step`, `k = 0..count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub equation_id: String,
    pub initial_id: String,
    pub metadata: TrajectoryMeta,
    /// Dense Hermite history (including substep nodes); not serialized.
    #[serde(skip)]
    pub(crate) nodes: Vec<Node>,
}

impl Trajectory {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.count().saturating_sub(1))
    }

    /// Solution value at any `t` in the grid range (dense interpolation).
    pub fn value_at(&self, t: f64) -> f64 {
        if self.nodes.len() >= 2 {
            let i = self.nodes.partition_point(|n| n.t <= t);
            if i == 0 {
                return self.nodes[0].x;
            }
            if i >= self.nodes.len() {
                return self.nodes[self.nodes.len() - 1].x;
            }
            return hermite(&self.nodes[i - 1], &self.nodes[i], t);
        }
        let u = ((t - self.start) / self.step).clamp(0.0, (self.count() - 1) as f64);
        let k = (u.floor() as usize).min(self.count().saturating_sub(2));
        let w = u - k as f64;
        if self.count() < 2 {
            return self.values[0];
        }
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }

    pub fn with_ids(mut self, equation_id: &str, initial_id: &str) -> Self {
        self.equation_id = equation_id.to_string();
        self.initial_id = initial_id.to_string();
        self
    }

    /// CSV export with header `t,x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.count() * 24 + 4);
        out.push_str("t,x\n");
        for (k, x) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.time(k), x);
        }
        out
    }
}

/// Integrates `eq` from its initial time to `t_end` on a grid of spacing `step`.
pub fn integrate(
    eq: &Equation,
    ic: &InitialCondition,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, SolverError> {
    validate(eq).into_result()?;
    ic.validate(eq.t0(), eq.tau_max())?;
    integrate::run(&Model::from_equation(eq), ic, t_end, step)
}

/// Convenience wrapper for linear equations.
pub fn integrate_linear(
    eq: &LinearDDE,
    ic: &InitialCondition,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, SolverError> {
    integrate(&Equation::Linear(eq.clone()), ic, t_end, step)
}

/// `X(·, s)`: zero history before `s` and unit value at `s`.
pub fn fundamental_function(
    eq: &LinearDDE,
    s: f64,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, SolverError> {
    if !(s >= eq.t0) {
        return Err(SolverError::InvalidParameter(format!(
            "initial point {s} precedes the equation's t0 = {}",
            eq.t0
        )));
    }
    let mut shifted = eq.clone();
    shifted.t0 = s;
    integrate_linear(&shifted, &InitialCondition::fundamental(), t_end, step)
}

/// Fitted envelope `|x(t)| ≲ M e^{-ν(t - t0)} sup|ψ|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(with = "ext_float")]
    pub nu: f64,
    #[serde(rename = "M", with = "ext_float")]
    pub m: f64,
    pub fit_window: [f64; 2],
    pub residual: f64,
    /// The tail was identically zero; `nu` is `+∞`.
    pub zero_tail: bool,
}

/// Least-squares fit of the log of the peak envelope of `|x|` on the last
/// `tail_fraction` of the trajectory.
pub fn estimate_decay(traj: &Trajectory, tail_fraction: f64) -> Result<DecayFit, SolverError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(SolverError::InvalidParameter(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let n = traj.count();
    let first = ((1.0 - tail_fraction) * n as f64).floor() as usize;
    let first = first.min(n);
    let points = n - first;
    if points < 50 {
        return Err(SolverError::TooShort { points });
    }
    let window = [traj.time(first), traj.end()];
    let abs: Vec<f64> = traj.values[first..].iter().map(|v| v.abs()).collect();
    if abs.iter().all(|v| *v == 0.0) {
        return Ok(DecayFit {
            nu: f64::INFINITY,
            m: 0.0,
            fit_window: window,
            residual: 0.0,
            zero_tail: true,
        });
    }
    let mut peaks: Vec<(f64, f64)> = (1..abs.len() - 1)
        .filter(|&i| abs[i] >= abs[i - 1] && abs[i] > abs[i + 1] && abs[i] > 0.0)
        .map(|i| (traj.time(first + i), abs[i]))
        .collect();
    if peaks.len() < 4 {
        // Monotone or nearly monotone tail: use block maxima instead.
        let blocks = 16;
        let len = abs.len() / blocks;
        peaks = (0..blocks)
            .filter_map(|b| {
                let lo = b * len;
                let hi = if b + 1 == blocks { abs.len() } else { lo + len };
                let (i, v) = abs[lo..hi]
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))?;
                (*v > 0.0).then(|| (traj.time(first + lo + i), *v))
            })
            .collect();
    }
    if peaks.len() < 2 {
        let (t, v) = peaks[0];
        return Ok(DecayFit {
            nu: 0.0,
            m: v / traj.metadata.psi_sup.max(f64::MIN_POSITIVE),
            fit_window: [t, t],
            residual: 0.0,
            zero_tail: false,
        });
    }
    let k = peaks.len() as f64;
    let mt = peaks.iter().map(|p| p.0).sum::<f64>() / k;
    let my = peaks.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let sxx: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1.ln() - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mt;
    let residual = (peaks
        .iter()
        .map(|p| (p.1.ln() - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let nu = -slope;
    let psi = traj.metadata.psi_sup;
    let scale = if psi > 0.0 { psi } else { 1.0 };
    let m = (intercept - nu * traj.start).exp() / scale;
    Ok(DecayFit {
        nu,
        m,
        fit_window: window,
        residual,
        zero_tail: false,
    })
}

/// Result of a positivity scan over grid values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub positive: bool,
    pub first_sign_change: Option<f64>,
}

/// Positive iff every grid value is `> 0`; the first non-positive crossing
/// is located by linear interpolation.
pub fn check_positivity(traj: &Trajectory) -> PositivityReport {
    for (k, &x) in traj.values.iter().enumerate() {
        if x <= 0.0 {
            let t = if k == 0 {
                traj.start
            } else {
                let prev = traj.values[k - 1];
                traj.time(k - 1) + traj.step * prev / (prev - x)
            };
            return PositivityReport {
                positive: false,
                first_sign_change: Some(t),
            };
        }
    }
    PositivityReport {
        positive: true,
        first_sign_change: None,
    }
}

/// Default grid spacing used by [`compute_phi`].
pub const PHI_STEP: f64 = 2e-3;

/// `Φ(τ) = ∫_0^∞ |X(t)| dt` for the fundamental function of
/// `x'(t) + x(t - τ) = 0`.
pub fn compute_phi(tau: f64) -> Result<f64, SolverError> {
    compute_phi_with_step(tau, PHI_STEP)
}

/// [`compute_phi`] with an explicit grid spacing (used for self-convergence
/// checks).
pub fn compute_phi_with_step(tau: f64, step: f64) -> Result<f64, SolverError> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(SolverError::InvalidParameter(format!(
            "tau must be finite and nonnegative, got {tau}"
        )));
    }
    if tau >= std::f64::consts::FRAC_PI_2 {
        return Err(SolverError::NotDecaying(tau));
    }
    if tau == 0.0 {
        return Ok(1.0);
    }
    let step = step.min(tau);
    let eq = crate::dde_model::corpus::c1(1.0, tau);
    let mut horizon = 40.0 + 40.0 * tau;
    while horizon <= 1e5 {
        let traj = fundamental_function(&eq, 0.0, horizon, step)?;
        let fit = estimate_decay(&traj, 0.5)?;
        let body = abs_trapezoid(&traj.values, step);
        if fit.zero_tail {
            return Ok(body);
        }
        if fit.nu > 0.0 {
            // Fitted envelope at the horizon, inflated for safety.
            let envelope = 2.0 * fit.m * traj.metadata.psi_sup * (-fit.nu * horizon).exp();
            let last_peak = traj.values[traj.count() / 2..]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let tail = envelope.max(last_peak * (-fit.nu * horizon / 2.0).exp()) / fit.nu;
            if tail < 1e-6 {
                return Ok(body + tail);
            }
        }
        horizon *= 2.0;
    }
    Err(SolverError::NotDecaying(tau))
}

/// `∫|x|` over a uniform grid, splitting intervals at linear sign changes.
fn abs_trapezoid(values: &[f64], step: f64) -> f64 {
    values
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if a * b >= 0.0 {
                0.5 * step * (a.abs() + b.abs())
            } else {
                let z = a / (a - b);
                0.5 * step * (z * a.abs() + (1.0 - z) * b.abs())
            }
        })
        .sum()
}

#[cfg(test)]
mod tests;
