//! Canonicalization: constant folding, merging of trigonometric polynomials
//! and closed-form evaluation of integrals of trigonometric polynomials.

use super::function::TimeFunction;
use std::f64::consts::FRAC_PI_2;

/// `offset + Σ amplitude·cos(omega·t + phase)`; one entry per frequency.
#[derive(Clone, Debug, Default)]
pub(crate) struct TrigPoly {
    pub offset: f64,
    pub waves: Vec<(f64, Vec<(f64, f64)>)>, // omega -> [(amplitude, phase)]
}

impl TrigPoly {
    pub fn from_function(f: &TimeFunction) -> Option<TrigPoly> {
        let mut p = TrigPoly::default();
        p.absorb(f, 1.0).then_some(p)
    }

    fn push_wave(&mut self, amplitude: f64, omega: f64, phase: f64) {
        // Normalize to positive frequency: cos(-ωt + φ) = cos(ωt - φ).
        let (omega, phase) = if omega < 0.0 { (-omega, -phase) } else { (omega, phase) };
        if let Some(entry) = self.waves.iter_mut().find(|(w, _)| *w == omega) {
            entry.1.push((amplitude, phase));
        } else {
            self.waves.push((omega, vec![(amplitude, phase)]));
        }
    }

    fn absorb(&mut self, f: &TimeFunction, k: f64) -> bool {
        match f {
            TimeFunction::Constant { value } => {
                self.offset += k * value;
                true
            }
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                self.offset += k * offset;
                if *omega == 0.0 {
                    self.offset += k * amplitude * phase.cos();
                } else if *amplitude != 0.0 {
                    self.push_wave(k * amplitude, *omega, *phase);
                }
                true
            }
            TimeFunction::Sum { terms } => terms.iter().all(|t| self.absorb(t, k)),
            TimeFunction::Scaled { factor, inner } => self.absorb(inner, k * factor),
            _ => false,
        }
    }

    /// Combine equal-frequency components by phasor addition.
    fn merged(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for (omega, comps) in &self.waves {
            if comps.len() == 1 {
                let (amp, ph) = comps[0];
                if amp != 0.0 {
                    out.push((amp, *omega, ph));
                }
                continue;
            }
            let c: f64 = comps.iter().map(|(a, p)| a * p.cos()).sum();
            let s: f64 = comps.iter().map(|(a, p)| a * p.sin()).sum();
            let scale: f64 = comps.iter().map(|(a, _)| a.abs()).sum();
            let r = c.hypot(s);
            if r <= 1e-15 * scale {
                continue;
            }
            out.push((r, *omega, s.atan2(c)));
        }
        out
    }

    pub fn to_function(&self) -> TimeFunction {
        let waves = self.merged();
        match waves.len() {
            0 => TimeFunction::constant(self.offset),
            1 => {
                let (a, w, p) = waves[0];
                TimeFunction::sinusoid(self.offset, a, w, p)
            }
            _ => {
                let mut terms: Vec<TimeFunction> = waves
                    .into_iter()
                    .map(|(a, w, p)| TimeFunction::sinusoid(0.0, a, w, p))
                    .collect();
                if self.offset != 0.0 {
                    terms.insert(0, TimeFunction::constant(self.offset));
                }
                TimeFunction::sum(terms)
            }
        }
    }

    /// `∫_{t-τ}^{t}` of the polynomial, as a polynomial in `t`.
    fn window_integral(&self, tau: f64) -> TrigPoly {
        let mut out = TrigPoly {
            offset: self.offset * tau,
            waves: Vec::new(),
        };
        for (omega, comps) in &self.waves {
            for (a, p) in comps {
                let amp = 2.0 * a / omega * (0.5 * omega * tau).sin();
                if amp != 0.0 {
                    out.push_wave(amp, *omega, p - 0.5 * omega * tau);
                }
            }
        }
        out
    }

    /// `∫_{origin}^{t}` of a polynomial without constant part.
    fn antiderivative(&self, origin: f64) -> TrigPoly {
        let mut out = TrigPoly::default();
        for (omega, comps) in &self.waves {
            for (a, p) in comps {
                out.offset -= a / omega * (omega * origin + p).sin();
                out.push_wave(a / omega, *omega, p - FRAC_PI_2);
            }
        }
        out
    }
}

fn flatten(kind: fn(&TimeFunction) -> Option<&Vec<TimeFunction>>, items: Vec<TimeFunction>) -> Vec<TimeFunction> {
    let mut out = Vec::new();
    for it in items {
        match kind(&it) {
            Some(children) => out.extend(children.iter().cloned()),
            None => out.push(it),
        }
    }
    out
}

fn dedup(items: Vec<TimeFunction>) -> Vec<TimeFunction> {
    let mut out: Vec<TimeFunction> = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

impl TimeFunction {
    /// Canonical, structurally simplified equivalent descriptor.
    pub fn simplified(&self) -> TimeFunction {
        match self {
            TimeFunction::Constant { .. }
            | TimeFunction::Tabulated { .. }
            | TimeFunction::Sawtooth { .. } => self.clone(),
            TimeFunction::Sinusoid { .. } => TrigPoly::from_function(self)
                .map(|p| p.to_function())
                .unwrap_or_else(|| self.clone()),
            TimeFunction::PiecewisePeriodic { values, .. } => {
                if values.windows(2).all(|w| w[0] == w[1]) {
                    TimeFunction::constant(values[0])
                } else {
                    self.clone()
                }
            }
            TimeFunction::Scaled { factor, inner } => {
                let inner = inner.simplified();
                scale_node(*factor, inner)
            }
            TimeFunction::Sum { terms } => {
                let terms: Vec<_> = terms.iter().map(|t| t.simplified()).collect();
                let terms = flatten(
                    |f| match f {
                        TimeFunction::Sum { terms } => Some(terms),
                        _ => None,
                    },
                    terms,
                );
                let mut trig = TrigPoly::default();
                let mut rest = Vec::new();
                for t in terms {
                    let mut probe = TrigPoly::default();
                    if probe.absorb(&t, 1.0) {
                        trig.absorb(&t, 1.0);
                    } else {
                        rest.push(t);
                    }
                }
                let trig_f = trig.to_function();
                if rest.is_empty() {
                    return trig_f;
                }
                if trig_f != TimeFunction::zero() {
                    match trig_f {
                        TimeFunction::Sum { terms } => rest.extend(terms),
                        other => rest.push(other),
                    }
                }
                if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    TimeFunction::sum(rest)
                }
            }
            TimeFunction::Product { factors } => {
                let factors: Vec<_> = factors.iter().map(|t| t.simplified()).collect();
                let factors = flatten(
                    |f| match f {
                        TimeFunction::Product { factors } => Some(factors),
                        _ => None,
                    },
                    factors,
                );
                let mut k = 1.0;
                let mut rest = Vec::new();
                for f in factors {
                    match f {
                        TimeFunction::Constant { value } => k *= value,
                        TimeFunction::Scaled { factor, inner } => {
                            k *= factor;
                            rest.push(*inner);
                        }
                        other => rest.push(other),
                    }
                }
                if k == 0.0 || rest.is_empty() {
                    return TimeFunction::constant(k);
                }
                let core = if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    TimeFunction::product(rest)
                };
                scale_node(k, core)
            }
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => {
                let n = numerator.simplified();
                let d = denominator.simplified();
                if n == d {
                    return TimeFunction::constant(1.0);
                }
                match (&n, &d) {
                    (_, TimeFunction::Constant { value }) if *value != 0.0 => {
                        scale_node(1.0 / value, n)
                    }
                    (TimeFunction::Constant { value }, _) if *value == 0.0 => TimeFunction::zero(),
                    _ => TimeFunction::quotient(n, d),
                }
            }
            TimeFunction::Abs { inner } => match inner.simplified() {
                TimeFunction::Constant { value } => TimeFunction::constant(value.abs()),
                TimeFunction::Abs { inner } => TimeFunction::Abs { inner },
                TimeFunction::Scaled { factor, inner } => {
                    scale_node(factor.abs(), TimeFunction::abs(*inner).simplified())
                }
                TimeFunction::PiecewisePeriodic {
                    period,
                    breakpoints,
                    values,
                } => TimeFunction::PiecewisePeriodic {
                    period,
                    breakpoints,
                    values: values.iter().map(|v| v.abs()).collect(),
                }
                .simplified(),
                TimeFunction::Sinusoid {
                    offset, amplitude, ..
                } if offset.abs() >= amplitude.abs() => {
                    let s = inner.simplified();
                    if offset >= 0.0 {
                        s
                    } else {
                        scale_node(-1.0, s)
                    }
                }
                other => {
                    if other.is_nonnegative_structurally() {
                        other
                    } else {
                        TimeFunction::abs(other)
                    }
                }
            },
            TimeFunction::PositivePart { inner } => match inner.simplified() {
                TimeFunction::Constant { value } => TimeFunction::constant(value.max(0.0)),
                TimeFunction::PiecewisePeriodic {
                    period,
                    breakpoints,
                    values,
                } => TimeFunction::PiecewisePeriodic {
                    period,
                    breakpoints,
                    values: values.iter().map(|v| v.max(0.0)).collect(),
                }
                .simplified(),
                other => {
                    if other.is_nonnegative_structurally() {
                        other
                    } else {
                        TimeFunction::positive_part(other)
                    }
                }
            },
            TimeFunction::Max { terms } | TimeFunction::Min { terms } => {
                let is_max = matches!(self, TimeFunction::Max { .. });
                let terms = dedup(terms.iter().map(|t| t.simplified()).collect());
                let (consts, mut rest): (Vec<_>, Vec<_>) =
                    terms.into_iter().partition(|t| t.as_constant().is_some());
                if !consts.is_empty() {
                    let vals = consts.iter().filter_map(|c| c.as_constant());
                    let c = if is_max {
                        vals.fold(f64::NEG_INFINITY, f64::max)
                    } else {
                        vals.fold(f64::INFINITY, f64::min)
                    };
                    rest.push(TimeFunction::constant(c));
                }
                if rest.len() == 1 {
                    rest.pop().unwrap()
                } else if is_max {
                    TimeFunction::max_of(rest)
                } else {
                    TimeFunction::min_of(rest)
                }
            }
            TimeFunction::Exp { rate, inner } => {
                let inner = inner.simplified();
                if *rate == 0.0 {
                    return TimeFunction::constant(1.0);
                }
                match inner {
                    TimeFunction::Constant { value } => TimeFunction::constant((rate * value).exp()),
                    other => TimeFunction::exp(*rate, other),
                }
            }
            TimeFunction::WindowIntegral { integrand, lag } => {
                let f = integrand.simplified();
                let l = lag.simplified();
                if let Some(c) = f.as_constant() {
                    return scale_node(c, l);
                }
                if let Some(tau) = l.as_constant() {
                    if tau == 0.0 {
                        return TimeFunction::zero();
                    }
                    if let Some(p) = TrigPoly::from_function(&f) {
                        return p.window_integral(tau).to_function();
                    }
                }
                TimeFunction::window_integral(f, l)
            }
            TimeFunction::Antiderivative { integrand, origin } => {
                let f = integrand.simplified();
                if let Some(p) = TrigPoly::from_function(&f) {
                    if p.offset == 0.0 {
                        return p.antiderivative(*origin).to_function();
                    }
                }
                if f.as_constant() == Some(0.0) {
                    return TimeFunction::zero();
                }
                TimeFunction::antiderivative(f, *origin)
            }
        }
    }

    /// Values are nonnegative by construction (no bound computation needed).
    pub(crate) fn is_nonnegative_structurally(&self) -> bool {
        match self {
            TimeFunction::Constant { value } => *value >= 0.0,
            TimeFunction::Sinusoid {
                offset, amplitude, ..
            } => *offset >= amplitude.abs(),
            TimeFunction::PiecewisePeriodic { values, .. } => values.iter().all(|v| *v >= 0.0),
            TimeFunction::Sawtooth { .. }
            | TimeFunction::Abs { .. }
            | TimeFunction::PositivePart { .. }
            | TimeFunction::Exp { .. } => true,
            TimeFunction::Scaled { factor, inner } => {
                *factor >= 0.0 && inner.is_nonnegative_structurally()
            }
            TimeFunction::Sum { terms } | TimeFunction::Product { factors: terms } | TimeFunction::Min { terms } => {
                terms.iter().all(|t| t.is_nonnegative_structurally())
            }
            TimeFunction::Max { terms } => terms.iter().any(|t| t.is_nonnegative_structurally()),
            _ => false,
        }
    }
}

fn scale_node(factor: f64, inner: TimeFunction) -> TimeFunction {
    if factor == 0.0 {
        return TimeFunction::zero();
    }
    if factor == 1.0 {
        return inner;
    }
    match inner {
        TimeFunction::Constant { value } => TimeFunction::constant(factor * value),
        TimeFunction::Scaled { factor: f2, inner } => scale_node(factor * f2, *inner),
        TimeFunction::Sinusoid {
            offset,
            amplitude,
            omega,
            phase,
        } => TimeFunction::sinusoid(factor * offset, factor * amplitude, omega, phase),
        TimeFunction::PiecewisePeriodic {
            period,
            breakpoints,
            values,
        } => TimeFunction::PiecewisePeriodic {
            period,
            breakpoints,
            values: values.iter().map(|v| factor * v).collect(),
        },
        TimeFunction::Sum { terms } if terms.iter().all(|t| TrigPoly::from_function(t).is_some()) => {
            TimeFunction::sum(terms.into_iter().map(|t| scale_node(factor, t)).collect())
        }
        other => TimeFunction::scaled(factor, other),
    }
}
