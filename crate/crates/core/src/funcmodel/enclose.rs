//! Range enclosures of descriptors over time intervals. Leaves are enclosed
//! exactly (up to rounding); composite nodes use interval arithmetic.

use super::function::{Extension, Table, TimeFunction};
use super::interval::Interval;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Range of `cos θ` for θ in `[t0, t1]`.
pub(crate) fn cos_range(t0: f64, t1: f64) -> Interval {
    if t1 - t0 >= TWO_PI {
        return Interval::new(-1.0, 1.0);
    }
    let (c0, c1) = (t0.cos(), t1.cos());
    let mut lo = c0.min(c1);
    let mut hi = c0.max(c1);
    // Maximum at 2kπ, minimum at (2k+1)π.
    if (t1 / TWO_PI).floor() >= (t0 / TWO_PI).ceil() {
        hi = 1.0;
    }
    if ((t1 - PI) / TWO_PI).floor() >= ((t0 - PI) / TWO_PI).ceil() {
        lo = -1.0;
    }
    Interval::new(lo, hi)
}

fn table_range(table: &Table, a: f64, b: f64) -> Interval {
    let last = (table.samples.len() - 1) as f64;
    let var = table.variation.unwrap_or(0.0);
    let span_len = (b - a) / table.step;
    let whole = || {
        let lo = table.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = table.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo - var, hi + var)
    };
    if table.extension == Extension::Periodic && span_len >= last {
        return whole();
    }
    let (sa, sb) = match (table.grid_coordinate(a), table.grid_coordinate(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Interval::entire(),
    };
    let mut lo = table.interpolate(sa).min(table.interpolate(sb));
    let mut hi = table.interpolate(sa).max(table.interpolate(sb));
    let mut visit = |from: f64, to: f64| {
        let k0 = from.floor() as usize + 1;
        let k1 = to.ceil() as usize;
        for k in k0..k1.min(table.samples.len()) {
            lo = lo.min(table.samples[k]);
            hi = hi.max(table.samples[k]);
        }
    };
    if sb >= sa {
        visit(sa, sb);
    } else {
        // Wrapped through the period end.
        visit(sa, last);
        visit(0.0, sb);
        lo = lo.min(table.samples[0]).min(table.samples[table.samples.len() - 1]);
        hi = hi.max(table.samples[0]).max(table.samples[table.samples.len() - 1]);
    }
    Interval::new(lo - var, hi + var)
}

impl TimeFunction {
    /// Interval containing every value of the function on `[a, b]`.
    pub fn enclose(&self, a: f64, b: f64) -> Interval {
        debug_assert!(a <= b);
        match self {
            TimeFunction::Constant { value } => Interval::point(*value),
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                let (t0, t1) = if *omega >= 0.0 {
                    (omega * a + phase, omega * b + phase)
                } else {
                    (omega * b + phase, omega * a + phase)
                };
                let c = cos_range(t0, t1);
                Interval::point(*offset).add(&c.scale(*amplitude))
            }
            TimeFunction::PiecewisePeriodic {
                period,
                breakpoints,
                values,
            } => {
                if b - a >= *period {
                    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    return Interval::new(lo, hi);
                }
                let n = values.len();
                let ua = a.rem_euclid(*period);
                let mut idx = breakpoints.partition_point(|x| *x <= ua).max(1) - 1;
                let mut lo = values[idx];
                let mut hi = values[idx];
                // Walk forward over piece starts inside (a, b].
                let mut cursor = a - ua; // period start preceding a
                loop {
                    let next_idx = (idx + 1) % n;
                    let next_start = if next_idx == 0 {
                        cursor + period
                    } else {
                        cursor + breakpoints[next_idx]
                    };
                    if next_start > b {
                        break;
                    }
                    if next_idx == 0 {
                        cursor += period;
                    }
                    idx = next_idx;
                    lo = lo.min(values[idx]);
                    hi = hi.max(values[idx]);
                }
                Interval::new(lo, hi)
            }
            TimeFunction::Sawtooth { period, phase } => {
                let ua = (a - phase).rem_euclid(*period);
                if ua + (b - a) >= *period {
                    Interval::new(0.0, *period)
                } else {
                    Interval::new(ua, ua + (b - a))
                }
            }
            TimeFunction::Tabulated { table } => table_range(table, a, b),
            TimeFunction::Sum { terms } => terms
                .iter()
                .fold(Interval::point(0.0), |acc, t| acc.add(&t.enclose(a, b))),
            TimeFunction::Scaled { factor, inner } => inner.enclose(a, b).scale(*factor),
            TimeFunction::Product { factors } => factors
                .iter()
                .fold(Interval::point(1.0), |acc, t| acc.mul(&t.enclose(a, b))),
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => {
                if numerator == denominator {
                    let d = denominator.enclose(a, b);
                    if !d.contains_zero() {
                        return Interval::point(1.0);
                    }
                }
                numerator.enclose(a, b).div(&denominator.enclose(a, b))
            }
            TimeFunction::Abs { inner } => inner.enclose(a, b).abs(),
            TimeFunction::PositivePart { inner } => inner.enclose(a, b).positive_part(),
            TimeFunction::Max { terms } => {
                let mut it = terms.iter().map(|t| t.enclose(a, b));
                let first = it.next().unwrap_or(Interval::entire());
                it.fold(first, |acc, x| acc.max(&x))
            }
            TimeFunction::Min { terms } => {
                let mut it = terms.iter().map(|t| t.enclose(a, b));
                let first = it.next().unwrap_or(Interval::entire());
                it.fold(first, |acc, x| acc.min(&x))
            }
            TimeFunction::Exp { rate, inner } => inner.enclose(a, b).scale(*rate).exp(),
            TimeFunction::WindowIntegral { integrand, lag } => {
                let l = lag.enclose(a, b);
                let (l_lo, l_hi) = (l.lo.max(0.0), l.hi.max(0.0));
                if !l_hi.is_finite() {
                    return Interval::entire();
                }
                let window_start = a - l_hi;
                let core_start = b - l_lo;
                let (core, fringe_len, fringe) = if core_start < a {
                    let core = integrand.signed_integral(core_start, a);
                    let left = integrand.enclose(window_start, core_start);
                    let right = integrand.enclose(a, b);
                    let len = (core_start - window_start) + (b - a);
                    (core, len, left.hull(&right))
                } else {
                    (0.0, b - window_start, integrand.enclose(window_start, b))
                };
                let extra = Interval::new(
                    fringe_len * fringe.lo.min(0.0),
                    fringe_len * fringe.hi.max(0.0),
                );
                Interval::point(core).add(&extra)
            }
            TimeFunction::Antiderivative { integrand, origin } => {
                let base = integrand.signed_integral(*origin, a);
                let r = integrand.enclose(a, b);
                let len = b - a;
                Interval::new(base + len * r.lo.min(0.0), base + len * r.hi.max(0.0))
            }
        }
    }
}

impl TimeFunction {
    /// Enclosure of the derivative on `[a, b]` for nodes that are smooth
    /// there; `None` when a node may be non-differentiable.
    pub(crate) fn slope(&self, a: f64, b: f64) -> Option<Interval> {
        match self {
            TimeFunction::Constant { .. } => Some(Interval::point(0.0)),
            TimeFunction::Sinusoid {
                amplitude,
                omega,
                phase,
                ..
            } => {
                // d/dt A cos(ωt + φ) = Aω cos(ωt + φ + π/2).
                let (t0, t1) = if *omega >= 0.0 {
                    (omega * a + phase, omega * b + phase)
                } else {
                    (omega * b + phase, omega * a + phase)
                };
                Some(cos_range(t0 + PI / 2.0, t1 + PI / 2.0).scale(amplitude * omega))
            }
            TimeFunction::Sum { terms } => terms.iter().try_fold(Interval::point(0.0), |acc, t| {
                t.slope(a, b).map(|d| acc.add(&d))
            }),
            TimeFunction::Scaled { factor, inner } => inner.slope(a, b).map(|d| d.scale(*factor)),
            TimeFunction::Product { factors } => {
                let ranges: Vec<Interval> = factors.iter().map(|f| f.enclose(a, b)).collect();
                let mut total = Interval::point(0.0);
                for (i, f) in factors.iter().enumerate() {
                    let mut term = f.slope(a, b)?;
                    for (j, r) in ranges.iter().enumerate() {
                        if j != i {
                            term = term.mul(r);
                        }
                    }
                    total = total.add(&term);
                }
                Some(total)
            }
            TimeFunction::Quotient {
                numerator,
                denominator,
            } => {
                let d = denominator.enclose(a, b);
                if d.contains_zero() {
                    return None;
                }
                let n = numerator.enclose(a, b);
                let (dn, dd) = (numerator.slope(a, b)?, denominator.slope(a, b)?);
                Some(dn.mul(&d).sub(&n.mul(&dd)).div(&d.mul(&d)))
            }
            TimeFunction::Abs { inner } => {
                let r = inner.enclose(a, b);
                if r.lo > 0.0 {
                    inner.slope(a, b)
                } else if r.hi < 0.0 {
                    inner.slope(a, b).map(|d| d.neg())
                } else {
                    None
                }
            }
            TimeFunction::PositivePart { inner } => {
                let r = inner.enclose(a, b);
                if r.lo > 0.0 {
                    inner.slope(a, b)
                } else if r.hi < 0.0 {
                    Some(Interval::point(0.0))
                } else {
                    None
                }
            }
            TimeFunction::Exp { rate, inner } => {
                let d = inner.slope(a, b)?;
                Some(d.scale(*rate).mul(&inner.enclose(a, b).scale(*rate).exp()))
            }
            // Lipschitz for a bounded integrand and a Lipschitz lag, so the
            // almost-everywhere derivative suffices for the mean-value form:
            // d/dt ∫_{t-l(t)}^t f = f(t) - f(t - l(t)) (1 - l'(t)).
            TimeFunction::WindowIntegral { integrand, lag } => {
                let l = lag.enclose(a, b);
                if !(l.lo >= 0.0 && l.hi.is_finite()) {
                    return None;
                }
                let dl = lag.slope(a, b)?;
                let head = integrand.enclose(a, b);
                let tail = integrand.enclose(a - l.hi, b - l.lo);
                Some(head.sub(&tail.mul(&Interval::point(1.0).sub(&dl))))
            }
            TimeFunction::Antiderivative { integrand, .. } => Some(integrand.enclose(a, b)),
            _ => None,
        }
    }

    /// Natural enclosure intersected with the centred (mean-value) form
    /// `f(m) + f'([a, b]) · [a - m, b - m]`, whose overestimation shrinks
    /// quadratically with the interval width for smooth functions.
    pub(crate) fn enclose_centered(&self, a: f64, b: f64) -> Interval {
        let natural = self.enclose(a, b);
        if b <= a || natural.width() == 0.0 {
            return natural;
        }
        let Some(d) = self.slope(a, b) else {
            return natural;
        };
        let m = 0.5 * (a + b);
        let fm = self.eval(m);
        if !fm.is_finite() || !d.lo.is_finite() || !d.hi.is_finite() {
            return natural;
        }
        let half = 0.5 * (b - a);
        let spread = d.mul(&Interval::new(-half, half));
        // Pad for the rounding of the point evaluation.
        let pad = 4.0 * f64::EPSILON * fm.abs();
        let lo = (fm + spread.lo - pad).max(natural.lo);
        let hi = (fm + spread.hi + pad).min(natural.hi);
        if lo <= hi {
            Interval::new(lo, hi)
        } else {
            natural
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_range_detects_extrema() {
        assert_eq!(cos_range(-0.1, 0.1).hi, 1.0);
        assert_eq!(cos_range(3.0, 3.3).lo, -1.0);
        let r = cos_range(0.5, 1.0);
        assert_eq!(r, Interval::new(1f64.cos(), 0.5f64.cos()));
    }

    #[test]
    fn piecewise_enclosure_over_part_of_period() {
        let f = TimeFunction::piecewise_periodic(3.0, &[(0.0, 1.0), (1.0, 5.0), (2.0, -2.0)])
            .unwrap();
        assert_eq!(f.enclose(0.2, 0.8), Interval::point(1.0));
        assert_eq!(f.enclose(0.2, 1.5), Interval::new(1.0, 5.0));
        assert_eq!(f.enclose(2.5, 3.5), Interval::new(-2.0, 1.0));
        assert_eq!(f.enclose(-0.5, 0.5), Interval::new(-2.0, 1.0));
    }

    #[test]
    fn window_integral_enclosure_contains_values() {
        let f = TimeFunction::window_integral(
            TimeFunction::sinusoid(1.0, 0.5, 1.0, 0.0),
            TimeFunction::sinusoid(0.3, 0.1, 2.0, 0.0),
        );
        let e = f.enclose(1.0, 1.2);
        for k in 0..=20 {
            let t = 1.0 + 0.01 * k as f64;
            assert!(e.contains(f.eval(t)));
        }
    }

    #[test]
    fn table_enclosure_includes_interior_samples() {
        let f = TimeFunction::tabulated(0.0, 1.0, vec![0.0, 5.0, -1.0, 2.0], Extension::Hold, Some(0.1))
            .unwrap();
        assert_eq!(f.enclose(0.5, 2.5), Interval::new(-1.1, 5.1));
    }

    #[test]
    fn centered_enclosure_is_tight_and_contains_values() {
        let f = TimeFunction::quotient(
            TimeFunction::sum(vec![
                TimeFunction::sinusoid(1.0, 0.5, 2.0, 0.3),
                TimeFunction::sinusoid(0.2, 0.1, 3.0, 1.0),
            ]),
            TimeFunction::sinusoid(2.0, 0.7, 1.0, 0.0),
        );
        for k in 0..200 {
            let a = -3.0 + 0.037 * k as f64;
            for w in [1e-3, 1e-2, 0.1, 0.5] {
                let c = f.enclose_centered(a, a + w);
                let n = f.enclose(a, a + w);
                assert!(c.lo >= n.lo && c.hi <= n.hi);
                for j in 0..=10 {
                    let v = f.eval(a + w * j as f64 / 10.0);
                    assert!(c.lo <= v + 1e-14 && v <= c.hi + 1e-14, "{v} outside {c}");
                }
            }
        }
        // Quadratic overestimation: a 1e-3 cell around an interior point.
        let (a, b) = (0.5, 0.501);
        let c = f.enclose_centered(a, b);
        let exact = (f.eval(a) - f.eval(b)).abs();
        assert!(c.width() < exact + 1e-5);
    }

    #[test]
    fn window_integral_centered_enclosure_contains_values() {
        let f = TimeFunction::product(vec![
            TimeFunction::window_integral(
                TimeFunction::abs(TimeFunction::sinusoid(0.0, 1.0, 2.0, 0.0)),
                TimeFunction::sinusoid(0.5, 0.3, 1.0, 0.4),
            ),
            TimeFunction::sinusoid(1.0, 0.5, 2.0, 0.0),
        ]);
        for k in 0..100 {
            let a = 0.071 * k as f64;
            for w in [1e-3, 1e-2, 0.1] {
                let c = f.enclose_centered(a, a + w);
                for j in 0..=10 {
                    let v = f.eval(a + w * j as f64 / 10.0);
                    assert!(c.lo <= v + 1e-12 && v <= c.hi + 1e-12, "{v} outside {c}");
                }
            }
        }
        let c = f.enclose_centered(1.0, 1.001);
        assert!(c.width() < (f.eval(1.0) - f.eval(1.001)).abs() + 1e-5);
    }
}
