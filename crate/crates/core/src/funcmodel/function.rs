//! The `TimeFunction` descriptor tree: construction, point evaluation,
//! periodicity analysis and discontinuity enumeration.

use super::FuncError;
use serde::{Deserialize, Serialize};

/// How a tabulated function is continued outside its sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// Evaluation outside the grid is a domain error.
    Error,
    /// The nearest end sample is held constant.
    Hold,
    /// The grid is repeated with period `(samples - 1) * step`.
    Periodic,
}

/// Uniform-grid samples with piecewise-linear interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub start: f64,
    pub step: f64,
    pub samples: Vec<f64>,
    pub extension: Extension,
    /// Optional bound on how far the true function may deviate from the
    /// interpolant inside any grid cell. Without it all bounds are heuristic.
    pub variation: Option<f64>,
}

impl Table {
    pub fn end(&self) -> f64 {
        self.start + self.step * (self.samples.len() - 1) as f64
    }

    pub fn span(&self) -> f64 {
        self.step * (self.samples.len() - 1) as f64
    }

    /// Map `t` to a fractional grid coordinate inside `[0, n-1]`, applying the
    /// extension rule; `None` when outside the domain under `Extension::Error`.
    pub(crate) fn grid_coordinate(&self, t: f64) -> Option<f64> {
        let last = (self.samples.len() - 1) as f64;
        let s = (t - self.start) / self.step;
        if (0.0..=last).contains(&s) {
            return Some(s);
        }
        match self.extension {
            Extension::Error => {
                // Tolerate round-off at the grid ends.
                if s > -1e-9 && s < last + 1e-9 {
                    Some(s.clamp(0.0, last))
                } else {
                    None
                }
            }
            Extension::Hold => Some(s.clamp(0.0, last)),
            Extension::Periodic => Some(s.rem_euclid(last)),
        }
    }

    pub(crate) fn interpolate(&self, s: f64) -> f64 {
        let n = self.samples.len();
        let i = (s.floor() as usize).min(n - 2);
        let frac = s - i as f64;
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        self.grid_coordinate(t).map(|s| self.interpolate(s))
    }
}

/// Scalar function of time described declaratively so that bounds,
/// integrals and periods can be computed from its structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `offset + amplitude * cos(omega * t + phase)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Periodic step function anchored at t = 0: `values[i]` on
    /// `[breakpoints[i], breakpoints[i+1])` modulo `period`.
    PiecewisePeriodic {
        period: f64,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Sum {
        terms: Vec<TimeFunction>,
    },
    Scaled {
        factor: f64,
        inner: Box<TimeFunction>,
    },
    Tabulated {
        table: Table,
    },
    /// `(t - phase) mod period`: time elapsed since the last period start.
    Sawtooth {
        period: f64,
        phase: f64,
    },
    Product {
        factors: Vec<TimeFunction>,
    },
    Quotient {
        numerator: Box<TimeFunction>,
        denominator: Box<TimeFunction>,
    },
    Abs {
        inner: Box<TimeFunction>,
    },
    PositivePart {
        inner: Box<TimeFunction>,
    },
    Max {
        terms: Vec<TimeFunction>,
    },
    Min {
        terms: Vec<TimeFunction>,
    },
    /// `exp(rate * inner(t))`.
    Exp {
        rate: f64,
        inner: Box<TimeFunction>,
    },
    /// `∫_{t - lag(t)}^{t} integrand(s) ds`.
    WindowIntegral {
        integrand: Box<TimeFunction>,
        lag: Box<TimeFunction>,
    },
    /// `∫_{origin}^{t} integrand(s) ds` (signed).
    Antiderivative {
        integrand: Box<TimeFunction>,
        origin: f64,
    },
}

/// Result of periodicity analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Periodicity {
    Constant,
    Periodic(f64),
    Aperiodic,
}

impl Periodicity {
    /// Common period of two periodic behaviours, if commensurate.
    pub fn combine(self, other: Periodicity) -> Periodicity {
        match (self, other) {
            (Periodicity::Constant, x) | (x, Periodicity::Constant) => x,
            (Periodicity::Aperiodic, _) | (_, Periodicity::Aperiodic) => Periodicity::Aperiodic,
            (Periodicity::Periodic(p), Periodicity::Periodic(q)) => match common_period(p, q) {
                Some(l) => Periodicity::Periodic(l),
                None => Periodicity::Aperiodic,
            },
        }
    }
}

const MAX_RATIO_DENOMINATOR: u64 = 64;
const COMMENSURATE_TOL: f64 = 1e-9;

/// Least common multiple of two periods whose ratio is a rational with
/// small denominator; `None` when the periods are (numerically) incommensurate.
pub fn common_period(p: f64, q: f64) -> Option<f64> {
    if (p - q).abs() <= COMMENSURATE_TOL * p.max(q) {
        return Some(p.max(q));
    }
    let r = p / q;
    // Continued-fraction convergents of r = num/den, den bounded.
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = r;
    for _ in 0..32 {
        let a = x.floor();
        if a > 1e9 {
            break;
        }
        let a_u = a as u64;
        let h2 = a_u * h1 + h0;
        let k2 = a_u * k1 + k0;
        if k2 > MAX_RATIO_DENOMINATOR || h2 > MAX_RATIO_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - r).abs() <= COMMENSURATE_TOL * r {
            // p / q = h1 / k1  =>  k1 * p = h1 * q is the common period.
            return Some(k1 as f64 * p);
        }
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

fn boxed(f: TimeFunction) -> Box<TimeFunction> {
    Box::new(f)
}

impl TimeFunction {
    // ----- constructors -------------------------------------------------

    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn sinusoid(offset: f64, amplitude: f64, omega: f64, phase: f64) -> Self {
        TimeFunction::Sinusoid {
            offset,
            amplitude,
            omega,
            phase,
        }
    }

    /// Checked constructor for a periodic step function given as
    /// `(breakpoint, value)` pairs.
    pub fn piecewise_periodic(period: f64, pieces: &[(f64, f64)]) -> Result<Self, FuncError> {
        let f = TimeFunction::PiecewisePeriodic {
            period,
            breakpoints: pieces.iter().map(|p| p.0).collect(),
            values: pieces.iter().map(|p| p.1).collect(),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(
        start: f64,
        step: f64,
        samples: Vec<f64>,
        extension: Extension,
        variation: Option<f64>,
    ) -> Result<Self, FuncError> {
        let f = TimeFunction::Tabulated {
            table: Table {
                start,
                step,
                samples,
                extension,
                variation,
            },
        };
        f.validate()?;
        Ok(f)
    }

    pub fn sawtooth(period: f64, phase: f64) -> Self {
        TimeFunction::Sawtooth { period, phase }
    }

    pub fn sum(terms: Vec<TimeFunction>) -> Self {
        TimeFunction::Sum { terms }
    }

    pub fn scaled(factor: f64, inner: TimeFunction) -> Self {
        TimeFunction::Scaled {
            factor,
            inner: boxed(inner),
        }
    }

    pub fn product(factors: Vec<TimeFunction>) -> Self {
        TimeFunction::Product { factors }
    }

    pub fn quotient(numerator: TimeFunction, denominator: TimeFunction) -> Self {
        TimeFunction::Quotient {
            numerator: boxed(numerator),
            denominator: boxed(denominator),
        }
    }

    pub fn abs(inner: TimeFunction) -> Self {
        TimeFunction::Abs {
            inner: boxed(inner),
        }
    }

    pub fn positive_part(inner: TimeFunction) -> Self {
        TimeFunction::PositivePart {
            inner: boxed(inner),
        }
    }

    pub fn max_of(terms: Vec<TimeFunction>) -> Self {
        TimeFunction::Max { terms }
    }

    pub fn min_of(terms: Vec<TimeFunction>) -> Self {
        TimeFunction::Min { terms }
    }

    pub fn exp(rate: f64, inner: TimeFunction) -> Self {
        TimeFunction::Exp {
            rate,
            inner: boxed(inner),
        }
    }

    pub fn window_integral(integrand: TimeFunction, lag: TimeFunction) -> Self {
        TimeFunction::WindowIntegral {
            integrand: boxed(integrand),
            lag: boxed(lag),
        }
    }

    pub fn antiderivative(integrand: TimeFunction, origin: f64) -> Self {
        TimeFunction::Antiderivative {
            integrand: boxed(integrand),
            origin,
        }
    }

    /// `self - other`.
    pub fn minus(&self, other: &TimeFunction) -> Self {
        Self::sum(vec![self.clone(), Self::scaled(-1.0, other.clone())])
    }

    // ----- structural validation ----------------------------------------

    /// Check the structural invariants of every node.
    pub fn validate(&self) -> Result<(), FuncError> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(FuncError::InvalidDescriptor(format!("{what} must be finite")))
            }
        };
        match self {
            TimeFunction::Constant { value } => finite(*value, "constant"),
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                finite(*offset, "sinusoid offset")?;
                finite(*amplitude, "sinusoid amplitude")?;
                finite(*omega, "sinusoid frequency")?;
                finite(*phase, "sinusoid phase")
            }
            TimeFunction::PiecewisePeriodic {
                period,
                breakpoints,
                values,
            } => {
                if !(period.is_finite() && *period > 0.0) {
                    return Err(FuncError::InvalidDescriptor(
                        "piecewise period must be positive".into(),
                    ));
                }
                if breakpoints.is_empty() || breakpoints.len() != values.len() {
                    return Err(FuncError::InvalidDescriptor(
                        "piecewise function needs one value per breakpoint".into(),
                    ));
                }
                if breakpoints[0] != 0.0 {
                    return Err(FuncError::InvalidDescriptor(
                        "first breakpoint must be 0".into(),
                    ));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(FuncError::InvalidDescriptor(
                        "breakpoints must be strictly ascending".into(),
                    ));
                }
                if breakpoints.iter().any(|b| *b >= *period) {
                    return Err(FuncError::InvalidDescriptor(
                        "breakpoints must lie in [0, period)".into(),
                    ));
                }
                values.iter().try_for_each(|v| finite(*v, "piece value"))
            }
            TimeFunction::Tabulated { table } => {
                if !(table.step.is_finite() && table.step > 0.0) {
                    return Err(FuncError::InvalidDescriptor(
                        "table step must be positive".into(),
                    ));
                }
                if table.samples.len() < 2 {
                    return Err(FuncError::InvalidDescriptor(
                        "table needs at least two samples".into(),
                    ));
                }
                finite(table.start, "table start")?;
                if let Some(v) = table.variation {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(FuncError::InvalidDescriptor(
                            "table variation must be nonnegative".into(),
                        ));
                    }
                }
                table.samples.iter().try_for_each(|v| finite(*v, "sample"))
            }
            TimeFunction::Sawtooth { period, phase } => {
                if !(period.is_finite() && *period > 0.0) {
                    return Err(FuncError::InvalidDescriptor(
                        "sawtooth period must be positive".into(),
                    ));
                }
                finite(*phase, "sawtooth phase")
            }
            TimeFunction::Scaled { factor, inner } => {
                finite(*factor, "scale factor")?;
                inner.validate()
            }
            TimeFunction::Exp { rate, inner } => {
                finite(*rate, "exponential rate")?;
                inner.validate()
            }
            TimeFunction::Antiderivative { integrand, origin } => {
                finite(*origin, "antiderivative origin")?;
                integrand.validate()
            }
            TimeFunction::Sum { terms }
            | TimeFunction::Max { terms }
            | TimeFunction::Min { terms }
            | TimeFunction::Product { factors: terms } => {
                if terms.is_empty() {
                    return Err(FuncError::InvalidDescriptor(
                        "composite node needs at least one child".into(),
                    ));
                }
                terms.iter().try_for_each(|t| t.validate())
            }
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => {
                numerator.validate()?;
                denominator.validate()
            }
            TimeFunction::Abs { inner } | TimeFunction::PositivePart { inner } => inner.validate(),
            TimeFunction::WindowIntegral { integrand, lag } => {
                integrand.validate()?;
                lag.validate()
            }
        }
    }

    /// Immediate children of a node.
    pub fn children(&self) -> Vec<&TimeFunction> {
        match self {
            TimeFunction::Constant { .. }
            | TimeFunction::Sinusoid { .. }
            | TimeFunction::PiecewisePeriodic { .. }
            | TimeFunction::Tabulated { .. }
            | TimeFunction::Sawtooth { .. } => vec![],
            TimeFunction::Sum { terms }
            | TimeFunction::Max { terms }
            | TimeFunction::Min { terms }
            | TimeFunction::Product { factors: terms } => terms.iter().collect(),
            TimeFunction::Scaled { inner, .. }
            | TimeFunction::Abs { inner }
            | TimeFunction::PositivePart { inner }
            | TimeFunction::Exp { inner, .. } => vec![inner],
            TimeFunction::Antiderivative { integrand, .. } => vec![integrand],
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => vec![numerator, denominator],
            TimeFunction::WindowIntegral { integrand, lag } => vec![integrand, lag],
        }
    }

    fn any_node(&self, pred: &dyn Fn(&TimeFunction) -> bool) -> bool {
        pred(self) || self.children().into_iter().any(|c| c.any_node(pred))
    }

    /// True when no tabulated data occurs anywhere in the tree.
    pub fn is_closed_form(&self) -> bool {
        !self.any_node(&|f| matches!(f, TimeFunction::Tabulated { .. }))
    }

    /// True when some tabulated leaf lacks a declared variation bound.
    pub fn has_unbounded_table(&self) -> bool {
        self.any_node(&|f| {
            matches!(f, TimeFunction::Tabulated { table } if table.variation.is_none())
        })
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            TimeFunction::Constant { value } => Some(*value),
            _ => None,
        }
    }

    /// Continuous on the whole line (no jumps in any node).
    pub fn is_continuous(&self) -> bool {
        match self {
            TimeFunction::PiecewisePeriodic { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
            TimeFunction::Sawtooth { .. } => false,
            TimeFunction::Tabulated { table } => table.extension != Extension::Error,
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => numerator.is_continuous() && denominator.is_continuous(),
            TimeFunction::WindowIntegral { lag, .. } => lag.is_continuous(),
            TimeFunction::Antiderivative { .. } => true,
            _ => self.children().into_iter().all(|c| c.is_continuous()),
        }
    }

    // ----- evaluation ---------------------------------------------------

    /// Point value; NaN outside the domain of a tabulated leaf.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => offset + amplitude * (omega * t + phase).cos(),
            TimeFunction::PiecewisePeriodic {
                period,
                breakpoints,
                values,
            } => {
                let u = t.rem_euclid(*period);
                let idx = breakpoints.partition_point(|b| *b <= u).max(1) - 1;
                values[idx]
            }
            TimeFunction::Sum { terms } => terms.iter().map(|f| f.eval(t)).sum(),
            TimeFunction::Scaled { factor, inner } => factor * inner.eval(t),
            TimeFunction::Tabulated { table } => table.eval(t).unwrap_or(f64::NAN),
            TimeFunction::Sawtooth { period, phase } => (t - phase).rem_euclid(*period),
            TimeFunction::Product { factors } => factors.iter().map(|f| f.eval(t)).product(),
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => numerator.eval(t) / denominator.eval(t),
            TimeFunction::Abs { inner } => inner.eval(t).abs(),
            TimeFunction::PositivePart { inner } => inner.eval(t).max(0.0),
            TimeFunction::Max { terms } => terms
                .iter()
                .map(|f| f.eval(t))
                .fold(f64::NEG_INFINITY, f64::max),
            TimeFunction::Min { terms } => {
                terms.iter().map(|f| f.eval(t)).fold(f64::INFINITY, f64::min)
            }
            TimeFunction::Exp { rate, inner } => (rate * inner.eval(t)).exp(),
            TimeFunction::WindowIntegral { integrand, lag } => {
                let l = lag.eval(t);
                integrand.signed_integral(t - l, t)
            }
            TimeFunction::Antiderivative { integrand, origin } => {
                integrand.signed_integral(*origin, t)
            }
        }
    }

    /// Point value with domain checking.
    pub fn try_eval(&self, t: f64) -> Result<f64, FuncError> {
        let v = self.eval(t);
        if v.is_nan() {
            Err(FuncError::Domain(t))
        } else {
            Ok(v)
        }
    }

    // ----- periodicity --------------------------------------------------

    pub fn periodicity(&self) -> Periodicity {
        match self {
            TimeFunction::Constant { .. } => Periodicity::Constant,
            TimeFunction::Sinusoid {
                amplitude, omega, ..
            } => {
                if *amplitude == 0.0 || *omega == 0.0 {
                    Periodicity::Constant
                } else {
                    Periodicity::Periodic(2.0 * std::f64::consts::PI / omega.abs())
                }
            }
            TimeFunction::PiecewisePeriodic { period, values, .. } => {
                if values.windows(2).all(|w| w[0] == w[1]) {
                    Periodicity::Constant
                } else {
                    Periodicity::Periodic(*period)
                }
            }
            TimeFunction::Tabulated { table } => {
                if table.samples.windows(2).all(|w| w[0] == w[1]) && table.extension != Extension::Error
                {
                    Periodicity::Constant
                } else if table.extension == Extension::Periodic {
                    Periodicity::Periodic(table.span())
                } else {
                    Periodicity::Aperiodic
                }
            }
            TimeFunction::Sawtooth { period, .. } => Periodicity::Periodic(*period),
            TimeFunction::Antiderivative { integrand, .. } => match integrand.periodicity() {
                Periodicity::Constant => {
                    if integrand.eval(0.0) == 0.0 {
                        Periodicity::Constant
                    } else {
                        Periodicity::Aperiodic
                    }
                }
                Periodicity::Periodic(p) => {
                    let mean = integrand.integral(0.0, p);
                    let scale = integrand.integral_abs_estimate(0.0, p).max(1e-300);
                    if mean.abs() <= 1e-12 * scale {
                        Periodicity::Periodic(p)
                    } else {
                        Periodicity::Aperiodic
                    }
                }
                Periodicity::Aperiodic => Periodicity::Aperiodic,
            },
            _ => self
                .children()
                .into_iter()
                .fold(Periodicity::Constant, |acc, c| acc.combine(c.periodicity())),
        }
    }

    // ----- discontinuities ----------------------------------------------

    /// Points in `[a, b]` where the function (or, with `kinks`, its first
    /// derivative) may be discontinuous. Sorted, deduplicated.
    pub fn breakpoints(&self, a: f64, b: f64, kinks: bool) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(a, b, kinks, &mut out);
        out.sort_by(|x, y| x.total_cmp(y));
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-13 * x.abs().max(1.0));
        out
    }

    const BREAKPOINT_CAP: usize = 200_000;

    fn collect_breakpoints(&self, a: f64, b: f64, kinks: bool, out: &mut Vec<f64>) {
        if !(a <= b) || out.len() > Self::BREAKPOINT_CAP {
            return;
        }
        let lattice = |origin: f64, period: f64, out: &mut Vec<f64>| {
            let k0 = ((a - origin) / period).ceil() as i64;
            let k1 = ((b - origin) / period).floor() as i64;
            if k1 - k0 > Self::BREAKPOINT_CAP as i64 {
                return;
            }
            for k in k0..=k1 {
                let t = origin + k as f64 * period;
                if t >= a && t <= b {
                    out.push(t);
                }
            }
        };
        match self {
            TimeFunction::PiecewisePeriodic {
                period,
                breakpoints,
                values,
            } => {
                let n = values.len();
                for (i, bp) in breakpoints.iter().enumerate() {
                    let prev = values[(i + n - 1) % n];
                    if prev != values[i] {
                        lattice(*bp, *period, out);
                    }
                }
            }
            TimeFunction::Sawtooth { period, phase } => lattice(*phase, *period, out),
            TimeFunction::Tabulated { table } => {
                if kinks {
                    match table.extension {
                        Extension::Periodic => lattice(table.start, table.step, out),
                        _ => {
                            let lo = a.max(table.start);
                            let hi = b.min(table.end());
                            if lo <= hi {
                                let k0 = ((lo - table.start) / table.step).ceil() as i64;
                                let k1 = ((hi - table.start) / table.step).floor() as i64;
                                for k in k0..=k1 {
                                    out.push(table.start + k as f64 * table.step);
                                }
                            }
                        }
                    }
                }
            }
            TimeFunction::WindowIntegral { integrand, lag } => {
                lag.collect_breakpoints(a, b, kinks, out);
                if kinks {
                    integrand.collect_breakpoints(a, b, kinks, out);
                }
            }
            TimeFunction::Antiderivative { integrand, .. } => {
                if kinks {
                    integrand.collect_breakpoints(a, b, kinks, out);
                }
            }
            _ => {
                for c in self.children() {
                    c.collect_breakpoints(a, b, kinks, out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_value_at_origin() {
        let b = TimeFunction::sinusoid(1.8, 0.2, 1.0, 0.0);
        assert_eq!(b.eval(0.0), 2.0);
    }

    #[test]
    fn zero_constant_everywhere() {
        let z = TimeFunction::zero();
        for t in [-3.0, 0.0, 17.5] {
            assert_eq!(z.eval(t), 0.0);
        }
    }

    #[test]
    fn piecewise_lookup_uses_period_origin() {
        let t_period = 1.0 + (1.5 - 0.5 / std::f64::consts::E).ln();
        let b = TimeFunction::piecewise_periodic(t_period, &[(0.0, 0.5), (1.0, 2.0)]).unwrap();
        assert_eq!(b.eval(1.1), 2.0);
        assert_eq!(b.eval(0.3), 0.5);
        assert_eq!(b.eval(t_period + 0.3), 0.5);
        assert_eq!(b.eval(-0.1), 2.0);
    }

    #[test]
    fn piecewise_rejects_bad_breakpoints() {
        assert!(TimeFunction::piecewise_periodic(1.0, &[(0.1, 1.0)]).is_err());
        assert!(TimeFunction::piecewise_periodic(1.0, &[(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(TimeFunction::piecewise_periodic(1.0, &[(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(TimeFunction::piecewise_periodic(0.0, &[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_reports_domain() {
        let f = TimeFunction::tabulated(0.0, 0.5, vec![0.0, 1.0, 3.0], Extension::Error, None)
            .unwrap();
        assert_eq!(f.eval(0.25), 0.5);
        assert_eq!(f.eval(0.75), 2.0);
        assert!(matches!(f.try_eval(2.0), Err(FuncError::Domain(_))));
        let h = TimeFunction::tabulated(0.0, 0.5, vec![0.0, 1.0, 3.0], Extension::Hold, None)
            .unwrap();
        assert_eq!(h.eval(5.0), 3.0);
        let p = TimeFunction::tabulated(0.0, 0.5, vec![0.0, 1.0, 0.0], Extension::Periodic, None)
            .unwrap();
        assert!((p.eval(1.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_rejects_degenerate_grids() {
        assert!(TimeFunction::tabulated(0.0, 0.0, vec![1.0, 2.0], Extension::Hold, None).is_err());
        assert!(TimeFunction::tabulated(0.0, 1.0, vec![1.0], Extension::Hold, None).is_err());
    }

    #[test]
    fn common_period_of_commensurate_periods() {
        let p = common_period(2.0, 3.0).unwrap();
        assert!((p - 6.0).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        let q = common_period(pi, 2.0 * pi).unwrap();
        assert!((q - 2.0 * pi).abs() < 1e-12);
        assert!(common_period(1.0, 2f64.sqrt()).is_none());
    }

    #[test]
    fn sawtooth_resets_each_period() {
        let s = TimeFunction::sawtooth(2.0, 0.0);
        assert_eq!(s.eval(0.5), 0.5);
        assert_eq!(s.eval(2.5), 0.5);
        assert_eq!(s.breakpoints(0.0, 5.0, false), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn periodicity_combines_children() {
        let f = TimeFunction::sum(vec![
            TimeFunction::sinusoid(0.0, 1.0, 2.0, 0.0),
            TimeFunction::sinusoid(0.0, 1.0, 1.0, 0.0),
        ]);
        match f.periodicity() {
            Periodicity::Periodic(p) => assert!((p - 2.0 * std::f64::consts::PI).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
    }
}
