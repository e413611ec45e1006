//! Fixed-step classical Runge–Kutta integration with method-of-steps history.

use super::{SolverError, Trajectory, TrajectoryMeta};
use crate::dde_model::{Equation, InitialCondition, LinearDDE, RatioShape};
use crate::funcmodel::{inf_val, ScanConfig, TimeFunction, Window};

/// How a term maps the delayed state to its contribution.
#[derive(Clone, Debug)]
enum Response {
    Linear(f64),
    Ratio(RatioShape),
}

#[derive(Clone, Debug)]
struct Term {
    coef: TimeFunction,
    lag: TimeFunction,
    instantaneous: bool,
    response: Response,
}

/// Right-hand side `x' = -Σ coef_j(t) g_j(x(t - lag_j(t)))`.
#[derive(Clone, Debug)]
pub(crate) struct Model {
    t0: f64,
    terms: Vec<Term>,
}

impl Model {
    pub(crate) fn from_equation(eq: &Equation) -> Model {
        match eq {
            Equation::Linear(e) => Self::from_linear(e),
            Equation::Nonlinear(e) => Model {
                t0: e.t0,
                terms: e
                    .terms
                    .iter()
                    .map(|t| Term {
                        coef: t.coef.simplified(),
                        lag: t.delay.lag.simplified(),
                        instantaneous: t.delay.is_zero(),
                        response: match &t.ratio {
                            RatioShape::One => Response::Linear(1.0),
                            other => Response::Ratio(other.clone()),
                        },
                    })
                    .collect(),
            },
        }
    }

    pub(crate) fn from_linear(e: &LinearDDE) -> Model {
        Model {
            t0: e.t0,
            terms: e
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef.simplified(),
                    lag: t.delay.lag.simplified(),
                    instantaneous: t.delay.is_zero(),
                    response: Response::Linear(t.sign.factor()),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Node {
    pub t: f64,
    pub x: f64,
    /// Derivative limit from the left of `t`.
    pub f_left: f64,
    /// Derivative limit from the right of `t`.
    pub f_right: f64,
}

/// Cubic Hermite interpolation on one history segment.
pub(crate) fn hermite(a: &Node, b: &Node, s: f64) -> f64 {
    let h = b.t - a.t;
    if h <= 0.0 {
        return b.x;
    }
    let u = ((s - a.t) / h).clamp(0.0, 1.0);
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * a.x + h10 * h * a.f_right + h01 * b.x + h11 * h * b.f_left
}

/// Dense solution: initial data before `t0`, Hermite pieces after.
pub(crate) struct History<'a> {
    pub ic: &'a InitialCondition,
    pub t0: f64,
    pub nodes: Vec<Node>,
}

impl History<'_> {
    pub fn value(&self, s: f64) -> f64 {
        if s < self.t0 {
            return self.ic.psi.eval(s);
        }
        let last = self.nodes.last().expect("history has the initial node");
        if s >= last.t {
            return last.x;
        }
        // Index of the first node with time > s.
        let i = self.nodes.partition_point(|n| n.t <= s);
        let a = &self.nodes[i - 1];
        if s == a.t {
            return a.x;
        }
        hermite(a, &self.nodes[i], s)
    }
}

const OVERFLOW: f64 = 1e150;

struct Stepper<'a> {
    model: &'a Model,
    hist: History<'a>,
}

impl Stepper<'_> {
    /// Delayed state for a term at stage time `t`; `(t_a, x_a)` is the start
    /// of the current substep and `x_stage` the stage estimate at `t`.
    fn delayed(&self, term: &Term, t: f64, t_a: f64, x_a: f64, x_stage: f64) -> f64 {
        if term.instantaneous {
            return x_stage;
        }
        let s = t - term.lag.eval(t);
        if s > t_a && t > t_a {
            // Delayed point inside the current substep.
            let w = ((s - t_a) / (t - t_a)).min(1.0);
            return x_a + w * (x_stage - x_a);
        }
        self.hist.value(s)
    }

    fn rhs(&self, t: f64, t_a: f64, x_a: f64, x_stage: f64) -> f64 {
        let mut acc = 0.0;
        for term in &self.model.terms {
            let u = self.delayed(term, t, t_a, x_a, x_stage);
            let g = match &term.response {
                Response::Linear(s) => s * u,
                Response::Ratio(shape) => u * shape.eval(u),
            };
            acc += term.coef.eval(t) * g;
        }
        -acc
    }

    /// One classical RK4 substep on `[t_a, t_b]`.
    fn substep(&mut self, t_a: f64, t_b: f64) -> Result<(), SolverError> {
        let h = t_b - t_a;
        let x_a = self.hist.nodes.last().unwrap().x;
        let delta = 1e-9 * h;
        let at = |c: f64| (t_a + c * h).clamp(t_a + delta, t_b - delta);
        let k1 = self.rhs(at(0.0), t_a, x_a, x_a);
        self.hist.nodes.last_mut().unwrap().f_right = k1;
        let x2 = x_a + 0.5 * h * k1;
        let k2 = self.rhs(at(0.5), t_a, x_a, x2);
        let x3 = x_a + 0.5 * h * k2;
        let k3 = self.rhs(at(0.5), t_a, x_a, x3);
        let x4 = x_a + h * k3;
        let k4 = self.rhs(at(1.0), t_a, x_a, x4);
        let x_b = x_a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !x_b.is_finite() || x_b.abs() > OVERFLOW {
            return Err(SolverError::Overflow { t: t_b });
        }
        // Provisional node so that the left derivative sees the new state.
        self.hist.nodes.push(Node {
            t: t_b,
            x: x_b,
            f_left: k4,
            f_right: k4,
        });
        let f_left = self.rhs(t_b - delta, t_a, x_a, x_b);
        let node = self.hist.nodes.last_mut().unwrap();
        node.f_left = f_left;
        node.f_right = f_left;
        Ok(())
    }
}

/// Times in `(a, b)` where the right-hand side may be non-smooth: descriptor
/// jumps and the first junction `t - lag(t) = t0` of each delayed term.
fn split_points(model: &Model, a: f64, b: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    for term in &model.terms {
        pts.extend(term.coef.breakpoints(a, b, false));
        pts.extend(term.lag.breakpoints(a, b, false));
        if term.instantaneous {
            continue;
        }
        let g = |t: f64| t - term.lag.eval(t) - model.t0;
        let (ga, gb) = (g(a), g(b));
        if ga < 0.0 && gb > 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if g(m) < 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            pts.push(0.5 * (lo + hi));
        }
    }
    let tol = 1e-12 * (b - a).max(1e-300) + 1e-14 * a.abs();
    pts.retain(|t| *t > a + tol && *t < b - tol);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| (*x - *y).abs() <= tol);
    pts
}

fn smallest_positive_lag(model: &Model) -> Option<f64> {
    let mut best: Option<f64> = None;
    for term in &model.terms {
        if term.instantaneous {
            continue;
        }
        let lo = inf_val(&term.lag, Window::halfline(model.t0), &ScanConfig::default()).value;
        if lo > 0.0 {
            best = Some(best.map_or(lo, |b| b.min(lo)));
        }
    }
    best
}

pub(crate) fn run(
    model: &Model,
    ic: &InitialCondition,
    t_end: f64,
    step: f64,
) -> Result<Trajectory, SolverError> {
    let t0 = model.t0;
    if !(step > 0.0 && step.is_finite()) {
        return Err(SolverError::InvalidStep(step));
    }
    if !(t_end > t0) {
        return Err(SolverError::InvalidHorizon { t0, t_end });
    }
    if let Some(min_lag) = smallest_positive_lag(model) {
        if step > min_lag {
            return Err(SolverError::StepTooLarge { step, min_lag });
        }
    }
    let count = ((t_end - t0) / step - 1e-9).ceil().max(1.0) as usize;
    let mut stepper = Stepper {
        model,
        hist: History {
            ic,
            t0,
            nodes: vec![Node {
                t: t0,
                x: ic.value_at_t0,
                f_left: 0.0,
                f_right: 0.0,
            }],
        },
    };
    let mut values = Vec::with_capacity(count + 1);
    values.push(ic.value_at_t0);
    for k in 0..count {
        let a = t0 + k as f64 * step;
        let b = t0 + (k + 1) as f64 * step;
        let mut cursor = a;
        for p in split_points(model, a, b) {
            stepper.substep(cursor, p)?;
            cursor = p;
        }
        stepper.substep(cursor, b)?;
        values.push(stepper.hist.nodes.last().unwrap().x);
    }
    let nodes = stepper.hist.nodes;
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // Trapezoid defect of the node derivatives: a cheap consistency measure.
    let residual_estimate = nodes
        .windows(2)
        .map(|w| {
            let h = w[1].t - w[0].t;
            if h <= 0.0 {
                0.0
            } else {
                ((w[1].x - w[0].x) / h - 0.5 * (w[0].f_right + w[1].f_left)).abs()
            }
        })
        .fold(0.0, f64::max);
    let tau_max = model
        .terms
        .iter()
        .map(|t| {
            crate::funcmodel::sup_val(&t.lag, Window::halfline(t0), &ScanConfig::default()).value
        })
        .fold(0.0, f64::max);
    let traj = Trajectory {
        start: t0,
        step,
        values,
        equation_id: String::new(),
        initial_id: ic.psi.to_string(),
        metadata: TrajectoryMeta {
            max_abs,
            residual_estimate,
            psi_sup: ic.sup_abs(t0, tau_max),
        },
        nodes,
    };
    Ok(traj)
}
