//! Sound extreme-value queries: suprema, infima, limsup/liminf over a
//! half-line, window-integral extremes and ratio norms, each reported with
//! its soundness class and bound direction.

use super::function::{Periodicity, TimeFunction};
use super::interval::Interval;
use super::FuncError;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// How far a reported bound can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Soundness {
    /// The true extreme, computed analytically or by converged refinement.
    Exact,
    /// A valid bound in the declared direction, possibly not tight.
    ConservativeSound,
    /// Best estimate from finite sampling; no guarantee.
    Heuristic,
}

impl Soundness {
    /// The weaker of two soundness classes.
    pub fn weakest(self, other: Soundness) -> Soundness {
        self.max(other)
    }

    pub fn is_sound(self) -> bool {
        self != Soundness::Heuristic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    UpperBound,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanWindow {
    Analytic,
    Range { start: f64, end: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub soundness: Soundness,
    pub direction: Direction,
    pub scan_window: ScanWindow,
}

/// Where a query is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    HalfLine { start: f64 },
    Segment { start: f64, end: f64 },
}

impl Window {
    pub fn halfline(start: f64) -> Self {
        Window::HalfLine { start }
    }

    pub fn segment(start: f64, end: f64) -> Self {
        Window::Segment { start, end }
    }

    pub fn start(&self) -> f64 {
        match self {
            Window::HalfLine { start } | Window::Segment { start, .. } => *start,
        }
    }
}

/// Finite scan used for aperiodic functions on a half-line: the tail window
/// `[start + offset, start + offset + width]` stands in for `t → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub offset: f64,
    pub width: f64,
    /// Initial lattice step for refinement; `None` uses 1024 cells per window.
    pub step: Option<f64>,
}

impl ScanConfig {
    /// Defaults scaled by the largest delay: offset 10·τ, width 100·τ.
    pub fn for_lag_bound(tau_max: f64) -> Self {
        let unit = if tau_max > 0.0 && tau_max.is_finite() {
            tau_max
        } else {
            1.0
        };
        ScanConfig {
            offset: 10.0 * unit,
            width: 100.0 * unit,
            step: None,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self::for_lag_bound(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremeKind {
    Sup,
    Limsup,
    Inf,
    Liminf,
}

impl ExtremeKind {
    pub fn is_upper(self) -> bool {
        matches!(self, ExtremeKind::Sup | ExtremeKind::Limsup)
    }

    pub fn is_limit(self) -> bool {
        matches!(self, ExtremeKind::Limsup | ExtremeKind::Liminf)
    }
}

const BNB_REL_TOL: f64 = 1e-12;
const BNB_MAX_ITER: usize = 40_000;
const BNB_INIT_CELLS: usize = 64;

#[derive(Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    ub: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.ub.total_cmp(&other.ub) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub.total_cmp(&other.ub)
    }
}

/// Outcome of branch-and-bound maximisation.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Refined {
    /// Rigorous upper bound (with respect to the enclosure evaluator).
    pub bound: f64,
    /// Largest sampled value.
    pub best: f64,
    pub converged: bool,
}

/// Maximise `sign · f` over `[a, b]` by interval branch-and-bound.
pub(crate) fn refine_max(
    f: &TimeFunction,
    a: f64,
    b: f64,
    sign: f64,
    init_cells: usize,
    max_iter: usize,
) -> Refined {
    let upper = |x: f64, y: f64| -> f64 {
        let e = f.enclose_centered(x, y);
        let e = if sign > 0.0 { e } else { e.neg() };
        if e.hi.is_nan() {
            f64::INFINITY
        } else {
            e.hi
        }
    };
    let value = |t: f64| -> f64 {
        let v = sign * f.eval(t);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    if !(b > a) {
        let v = value(a);
        let ub = upper(a, a).min(f64::INFINITY);
        return Refined {
            bound: ub.max(v),
            best: v,
            converged: (ub - v).abs() <= BNB_REL_TOL * v.abs().max(1.0),
        };
    }
    let mut cuts: Vec<f64> = (0..=init_cells)
        .map(|k| a + (b - a) * k as f64 / init_cells as f64)
        .collect();
    let bps = f.breakpoints(a, b, false);
    if bps.len() < 50_000 {
        cuts.extend(bps);
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.dedup();
    }
    let mut best = f64::NEG_INFINITY;
    let mut heap = BinaryHeap::new();
    for w in cuts.windows(2) {
        let (x, y) = (w[0], w[1]);
        if y <= x {
            continue;
        }
        best = best.max(value(x)).max(value(0.5 * (x + y)));
        heap.push(Cell { a: x, b: y, ub: upper(x, y) });
    }
    best = best.max(value(b));
    // Left limits just before each cut catch suprema approached at jumps.
    let mut pruned_max = f64::NEG_INFINITY;
    let mut iter = 0usize;
    while let Some(cell) = heap.pop() {
        let tol = BNB_REL_TOL * best.abs().max(1.0);
        if cell.ub - best <= tol {
            return Refined {
                bound: cell.ub.max(pruned_max).max(best),
                best,
                converged: true,
            };
        }
        let width = cell.b - cell.a;
        iter += 1;
        if iter > max_iter || width <= 1e-13 * cell.a.abs().max(1.0) {
            let rest = heap.iter().map(|c| c.ub).fold(cell.ub, f64::max);
            return Refined {
                bound: rest.max(pruned_max).max(best),
                best,
                converged: false,
            };
        }
        let m = 0.5 * (cell.a + cell.b);
        best = best.max(value(m));
        // Sample close to the right end to approach left-limit suprema.
        best = best.max(value(cell.b - 1e-3 * width));
        for (x, y) in [(cell.a, m), (m, cell.b)] {
            let ub = upper(x, y).min(cell.ub);
            if ub > best + tol {
                heap.push(Cell { a: x, b: y, ub });
            } else {
                pruned_max = pruned_max.max(ub);
            }
        }
    }
    Refined {
        bound: pruned_max.max(best),
        best,
        converged: true,
    }
}

/// Range over the window computable in closed form, if any.
fn analytic_range(f: &TimeFunction, window: Window) -> Option<Interval> {
    let seg = |start: f64, end: f64| -> Option<Interval> {
        Some(f.enclose(start, end))
    };
    match f {
        TimeFunction::Constant { value } => Some(Interval::point(*value)),
        TimeFunction::Sinusoid { .. } | TimeFunction::PiecewisePeriodic { .. } => match window {
            Window::HalfLine { start } => match f.periodicity() {
                Periodicity::Periodic(p) => seg(start, start + p),
                _ => seg(start, start),
            },
            Window::Segment { start, end } => seg(start, end),
        },
        TimeFunction::Sawtooth { period, .. } => match window {
            Window::HalfLine { .. } => Some(Interval::new(0.0, *period)),
            Window::Segment { start, end } => seg(start, end),
        },
        TimeFunction::Scaled { factor, inner } => {
            analytic_range(inner, window).map(|r| r.scale(*factor))
        }
        TimeFunction::Abs { inner } if inner.is_continuous() => {
            analytic_range(inner, window).map(|r| r.abs())
        }
        TimeFunction::PositivePart { inner } if inner.is_continuous() => {
            analytic_range(inner, window).map(|r| r.positive_part())
        }
        TimeFunction::Exp { rate, inner } => {
            analytic_range(inner, window).map(|r| r.scale(*rate).exp())
        }
        _ => None,
    }
}

/// Sup/limsup/inf/liminf of `f` over `window`.
pub fn extreme(f: &TimeFunction, window: Window, kind: ExtremeKind, scan: &ScanConfig) -> BoundReport {
    let g = f.simplified();
    let upper = kind.is_upper();
    let direction = if upper {
        Direction::UpperBound
    } else {
        Direction::LowerBound
    };
    if let Some(r) = analytic_range(&g, window) {
        return BoundReport {
            value: if upper { r.hi } else { r.lo },
            soundness: Soundness::Exact,
            direction,
            scan_window: ScanWindow::Analytic,
        };
    }
    let sign = if upper { 1.0 } else { -1.0 };
    let cells = |len: f64| -> usize {
        match scan.step {
            Some(h) if h > 0.0 => ((len / h).ceil() as usize).clamp(BNB_INIT_CELLS, 1 << 20),
            _ => BNB_INIT_CELLS.max(1024.min((len * 16.0).ceil() as usize)),
        }
    };
    let mut heuristic = g.has_unbounded_table();
    let (refined, start, end) = match window {
        Window::Segment { start, end } => {
            (refine_max(&g, start, end, sign, cells(end - start), BNB_MAX_ITER), start, end)
        }
        Window::HalfLine { start } => match g.periodicity() {
            Periodicity::Constant => {
                let v = g.eval(start);
                (Refined { bound: sign * v, best: sign * v, converged: true }, start, start)
            }
            Periodicity::Periodic(p) => (
                refine_max(&g, start, start + p, sign, cells(p), BNB_MAX_ITER),
                start,
                start + p,
            ),
            Periodicity::Aperiodic => {
                heuristic = true;
                let tail_a = start + scan.offset;
                let tail_b = tail_a + scan.width;
                let tail = refine_max(&g, tail_a, tail_b, sign, cells(scan.width), BNB_MAX_ITER);
                if kind.is_limit() {
                    (tail, tail_a, tail_b)
                } else {
                    let head = refine_max(&g, start, tail_a, sign, cells(scan.offset), BNB_MAX_ITER);
                    (
                        Refined {
                            bound: head.bound.max(tail.bound),
                            best: head.best.max(tail.best),
                            converged: head.converged && tail.converged,
                        },
                        start,
                        tail_b,
                    )
                }
            }
        },
    };
    let soundness = if heuristic {
        Soundness::Heuristic
    } else if refined.converged && g.is_closed_form() {
        Soundness::Exact
    } else {
        Soundness::ConservativeSound
    };
    BoundReport {
        value: sign * refined.bound,
        soundness,
        direction,
        scan_window: ScanWindow::Range { start, end },
    }
}

/// Upper bound on `sup |f|` (the essential-supremum norm on a half-line).
pub fn sup_abs(f: &TimeFunction, window: Window, scan: &ScanConfig) -> BoundReport {
    extreme(&TimeFunction::abs(f.clone()), window, ExtremeKind::Sup, scan)
}

/// Upper bound on `sup f`.
pub fn sup_val(f: &TimeFunction, window: Window, scan: &ScanConfig) -> BoundReport {
    extreme(f, window, ExtremeKind::Sup, scan)
}

/// Lower bound on `inf f`.
pub fn inf_val(f: &TimeFunction, window: Window, scan: &ScanConfig) -> BoundReport {
    extreme(f, window, ExtremeKind::Inf, scan)
}

/// `∫_a^b f`, rejecting reversed bounds.
pub fn integral(f: &TimeFunction, a: f64, b: f64) -> Result<f64, FuncError> {
    if a > b {
        return Err(FuncError::ReversedBounds { a, b });
    }
    let v = f.integral(a, b);
    if v.is_nan() {
        Err(FuncError::Domain(if f.try_eval(a).is_err() { a } else { b }))
    } else {
        Ok(v)
    }
}

/// Extreme of `t ↦ ∫_{t - lag(t)}^{t} f` on the half-line from `t0`.
pub fn window_integral_extreme(
    f: &TimeFunction,
    lag: &TimeFunction,
    kind: ExtremeKind,
    t0: f64,
    scan: &ScanConfig,
) -> Result<BoundReport, FuncError> {
    let lag_sup = sup_val(lag, Window::halfline(t0), scan);
    if !lag_sup.value.is_finite() {
        return Err(FuncError::UnboundedLag);
    }
    let w = TimeFunction::window_integral(f.clone(), lag.clone());
    Ok(extreme(&w, Window::halfline(t0), kind, scan))
}

/// Upper bound on `sup |f/g|` for `g` separated from zero.
pub fn ratio_sup(
    f: &TimeFunction,
    g: &TimeFunction,
    window: Window,
    scan: &ScanConfig,
) -> Result<BoundReport, FuncError> {
    let g_inf = inf_val(g, window, scan);
    if !(g_inf.value > 0.0) {
        return Err(FuncError::DenominatorNotSeparated(g_inf.value));
    }
    let fs = f.simplified();
    let gs = g.simplified();
    if fs == gs {
        return Ok(BoundReport {
            value: 1.0,
            soundness: Soundness::Exact,
            direction: Direction::UpperBound,
            scan_window: ScanWindow::Analytic,
        });
    }
    let f_sup = sup_abs(&fs, window, scan);
    let fallback = f_sup.value / g_inf.value;
    let fallback_soundness = f_sup.soundness.weakest(g_inf.soundness).weakest(Soundness::ConservativeSound);
    let quotient = TimeFunction::abs(TimeFunction::quotient(fs, gs)).simplified();
    // Joint refinement with a bounded budget of 64 refinements per initial cell.
    let (a, b, heuristic) = match window {
        Window::Segment { start, end } => (start, end, false),
        Window::HalfLine { start } => match quotient.periodicity() {
            Periodicity::Constant => (start, start, false),
            Periodicity::Periodic(p) => (start, start + p, false),
            Periodicity::Aperiodic => (start, start + scan.offset + scan.width, true),
        },
    };
    let direct = if let Some(r) = analytic_range(&quotient, window) {
        Some((r.hi, Soundness::Exact))
    } else {
        let init = 256;
        let r = refine_max(&quotient, a, b, 1.0, init, 64 * init);
        let s = if heuristic || quotient.has_unbounded_table() {
            Soundness::Heuristic
        } else if r.converged && quotient.is_closed_form() {
            Soundness::Exact
        } else {
            Soundness::ConservativeSound
        };
        r.bound.is_finite().then_some((r.bound, s))
    };
    let (value, soundness) = match direct {
        Some((v, s)) if v <= fallback => (v, s),
        _ => (fallback, fallback_soundness),
    };
    Ok(BoundReport {
        value,
        soundness,
        direction: Direction::UpperBound,
        scan_window: match direct {
            Some(_) if value < fallback || a == b => {
                if a == b {
                    ScanWindow::Analytic
                } else {
                    ScanWindow::Range { start: a, end: b }
                }
            }
            _ => f_sup.scan_window,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scan() -> ScanConfig {
        ScanConfig::default()
    }

    fn a1() -> TimeFunction {
        // 1 - 2cos²t
        TimeFunction::sinusoid(0.0, -1.0, 2.0, 0.0)
    }

    fn a2() -> TimeFunction {
        // 2cos²t
        TimeFunction::sinusoid(1.0, 1.0, 2.0, 0.0)
    }

    #[test]
    fn norms_of_example_coefficients() {
        let w = Window::halfline(0.0);
        let r1 = sup_abs(&a1(), w, &scan());
        let r2 = sup_abs(&a2(), w, &scan());
        assert_eq!(r1.value, 1.0);
        assert_eq!(r2.value, 2.0);
        assert_eq!(r1.soundness, Soundness::Exact);
        assert_eq!(r1.direction, Direction::UpperBound);
        assert_eq!(sup_abs(&TimeFunction::constant(-3.0), w, &scan()).value, 3.0);
    }

    #[test]
    fn infima() {
        let w = Window::halfline(0.0);
        assert_eq!(inf_val(&TimeFunction::sum(vec![a1(), a2()]), w, &scan()).value, 1.0);
        assert_eq!(inf_val(&TimeFunction::constant(2.5), w, &scan()).value, 2.5);
        let b = TimeFunction::sinusoid(1.8, 0.2, 1.0, 0.0);
        let r = inf_val(&b, w, &scan());
        assert!((r.value - 1.6).abs() < 1e-15);
        assert_eq!(r.direction, Direction::LowerBound);
    }

    #[test]
    fn window_integral_examples() {
        let one = TimeFunction::constant(1.0);
        for kind in [ExtremeKind::Sup, ExtremeKind::Limsup, ExtremeKind::Inf, ExtremeKind::Liminf] {
            let r = window_integral_extreme(
                &TimeFunction::constant(2.0),
                &TimeFunction::constant(0.3),
                kind,
                0.0,
                &scan(),
            )
            .unwrap();
            assert!((r.value - 0.6).abs() < 1e-15);
        }
        let r = window_integral_extreme(
            &TimeFunction::sum(vec![a1(), a2()]),
            &TimeFunction::constant(0.2),
            ExtremeKind::Limsup,
            0.0,
            &scan(),
        )
        .unwrap();
        assert!((r.value - 0.2).abs() < 1e-15);
        let lag = TimeFunction::sinusoid(0.25, 0.07, 1.0, -PI / 2.0);
        let r = window_integral_extreme(&one, &lag, ExtremeKind::Limsup, 0.0, &scan()).unwrap();
        assert!((r.value - 0.32).abs() < 1e-12);
        assert_eq!(r.soundness, Soundness::Exact);
    }

    #[test]
    fn window_integral_of_oscillating_integrand_is_refined() {
        let f = TimeFunction::sinusoid(1.0, 0.5, 1.0, 0.0);
        let lag = TimeFunction::sinusoid(0.5, 0.2, 3.0, 0.0);
        let r = window_integral_extreme(&f, &lag, ExtremeKind::Sup, 0.0, &scan()).unwrap();
        let w = TimeFunction::window_integral(f, lag);
        let brute = (0..200_000)
            .map(|k| w.eval(k as f64 * 2.0 * PI / 200_000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(r.value >= brute - 1e-12);
        assert!(r.value - brute < 1e-6);
        assert_ne!(r.soundness, Soundness::Heuristic);
    }

    #[test]
    fn ratio_examples() {
        let w = Window::halfline(0.0);
        let s = scan();
        let a = TimeFunction::sum(vec![a1(), a2()]);
        assert!((ratio_sup(&a1(), &a, w, &s).unwrap().value - 1.0).abs() < 1e-15);
        let f = TimeFunction::sinusoid(2.0, 1.0, 1.0, 0.0);
        assert_eq!(ratio_sup(&f, &f, w, &s).unwrap().value, 1.0);
        let r = ratio_sup(&TimeFunction::constant(0.5), &TimeFunction::constant(1.0), w, &s).unwrap();
        assert_eq!(r.value, 0.5);
        assert!(matches!(
            ratio_sup(&f, &a1(), w, &s),
            Err(FuncError::DenominatorNotSeparated(_))
        ));
    }

    #[test]
    fn tabulated_without_variation_is_heuristic() {
        let t = TimeFunction::tabulated(
            0.0,
            0.1,
            vec![1.0, 2.0, 0.5, 1.5],
            crate::funcmodel::Extension::Periodic,
            None,
        )
        .unwrap();
        let r = sup_abs(&t, Window::halfline(0.0), &scan());
        assert_eq!(r.soundness, Soundness::Heuristic);
        assert!((r.value - 2.0).abs() < 1e-12);
        let tv = TimeFunction::tabulated(
            0.0,
            0.1,
            vec![1.0, 2.0, 0.5, 1.5],
            crate::funcmodel::Extension::Periodic,
            Some(0.05),
        )
        .unwrap();
        let r = sup_abs(&tv, Window::halfline(0.0), &scan());
        assert_eq!(r.soundness, Soundness::ConservativeSound);
        assert!(r.value >= 2.05 - 1e-12);
    }

    #[test]
    fn reversed_integral_is_error() {
        assert!(matches!(
            integral(&TimeFunction::constant(1.0), 1.0, 0.0),
            Err(FuncError::ReversedBounds { .. })
        ));
    }
}
