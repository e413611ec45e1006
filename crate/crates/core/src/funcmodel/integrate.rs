//! Definite integrals of descriptors: closed-form antiderivatives where the
//! structure allows, adaptive Gauss–Kronrod quadrature otherwise.

use super::function::{Extension, Table, TimeFunction};

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gauss_kronrod(f, a, b);
    if err <= tol || depth == 0 || (b - a) <= 1e-14 * a.abs().max(1.0) {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature of an arbitrary closure over `[a, b]`, splitting at the
/// supplied breakpoints and into chunks no longer than `chunk`.
pub fn quadrature(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], chunk: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|t| *t > a && *t < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = (((hi - lo) / chunk).ceil() as usize).clamp(1, 100_000);
        let h = (hi - lo) / pieces as f64;
        for k in 0..pieces {
            let x0 = lo + k as f64 * h;
            let x1 = if k + 1 == pieces { hi } else { x0 + h };
            total += adaptive(f, x0, x1, 1e-13 * (x1 - x0).max(1e-300), 40);
        }
    }
    total
}

fn table_antiderivative(table: &Table, t: f64) -> f64 {
    // ∫_{start}^{t} of the extended interpolant.
    let n = table.samples.len();
    let cell = |i: usize| 0.5 * table.step * (table.samples[i] + table.samples[i + 1]);
    let within = |s: f64| -> f64 {
        // s in [0, n-1]
        let i = (s.floor() as usize).min(n - 2);
        let full: f64 = (0..i).map(cell).sum();
        let frac = s - i as f64;
        let v0 = table.samples[i];
        let v1 = table.samples[i + 1];
        full + table.step * frac * (v0 + 0.5 * frac * (v1 - v0))
    };
    let last = (n - 1) as f64;
    let s = (t - table.start) / table.step;
    match table.extension {
        Extension::Error => {
            if s < -1e-9 || s > last + 1e-9 {
                f64::NAN
            } else {
                within(s.clamp(0.0, last))
            }
        }
        Extension::Hold => {
            if s < 0.0 {
                (t - table.start) * table.samples[0]
            } else if s > last {
                within(last) + (t - table.end()) * table.samples[n - 1]
            } else {
                within(s)
            }
        }
        Extension::Periodic => {
            let k = (s / last).floor();
            let r = s - k * last;
            let period_mass = within(last);
            k * period_mass + within(r.clamp(0.0, last))
        }
    }
}

impl TimeFunction {
    /// `∫_a^b f` for `a <= b`. Reversed bounds yield NaN; use
    /// [`TimeFunction::signed_integral`] for oriented integrals.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if a > b {
            return f64::NAN;
        }
        self.signed_integral(a, b)
    }

    /// Oriented integral: `-∫_b^a f` when `a > b`.
    pub fn signed_integral(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        if a > b {
            return -self.signed_integral(b, a);
        }
        if let Some(v) = self.closed_integral(a, b) {
            return v;
        }
        self.numeric_integral(a, b)
    }

    /// Exact integral through an explicit antiderivative where the node
    /// structure admits one.
    fn closed_integral(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            TimeFunction::Constant { value } => Some(value * (b - a)),
            TimeFunction::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                if *omega == 0.0 {
                    Some((offset + amplitude * phase.cos()) * (b - a))
                } else {
                    Some(
                        offset * (b - a)
                            + amplitude / omega * ((omega * b + phase).sin() - (omega * a + phase).sin()),
                    )
                }
            }
            TimeFunction::PiecewisePeriodic {
                period,
                breakpoints,
                values,
            } => {
                let prim = |t: f64| -> f64 {
                    let k = (t / period).floor();
                    let u = t - k * period;
                    let mut acc = 0.0;
                    let mut per = 0.0;
                    for i in 0..values.len() {
                        let lo = breakpoints[i];
                        let hi = if i + 1 < values.len() {
                            breakpoints[i + 1]
                        } else {
                            *period
                        };
                        per += values[i] * (hi - lo);
                        if u > lo {
                            acc += values[i] * (u.min(hi) - lo);
                        }
                    }
                    k * per + acc
                };
                Some(prim(b) - prim(a))
            }
            TimeFunction::Sawtooth { period, phase } => {
                let prim = |t: f64| -> f64 {
                    let x = t - phase;
                    let k = (x / period).floor();
                    let u = x - k * period;
                    k * period * period * 0.5 + 0.5 * u * u
                };
                Some(prim(b) - prim(a))
            }
            TimeFunction::Tabulated { table } => {
                Some(table_antiderivative(table, b) - table_antiderivative(table, a))
            }
            TimeFunction::Sum { terms } => {
                let mut total = 0.0;
                for t in terms {
                    total += t.signed_integral(a, b);
                }
                Some(total)
            }
            TimeFunction::Scaled { factor, inner } => Some(factor * inner.signed_integral(a, b)),
            _ => None,
        }
    }

    fn numeric_integral(&self, a: f64, b: f64) -> f64 {
        let breaks = self.breakpoints(a, b, true);
        let chunk = match self.periodicity() {
            super::Periodicity::Periodic(p) => (p / 8.0).max((b - a) / 20_000.0),
            _ => ((b - a) / 8.0).clamp(1e-3, 1.0).max((b - a) / 20_000.0),
        };
        quadrature(&|t| self.eval(t), a, b, &breaks, chunk)
    }

    /// Scale of `∫|f|` over `[a, b]`, used to normalize cancellation tests.
    pub(crate) fn integral_abs_estimate(&self, a: f64, b: f64) -> f64 {
        let n = 256;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|k| self.eval(a + (k as f64 + 0.5) * h).abs() * h)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_integral() {
        assert_eq!(TimeFunction::zero().integral(0.0, 1.0), 0.0);
    }

    #[test]
    fn full_period_cosine_vanishes() {
        let c = TimeFunction::sinusoid(0.0, 1.0, 1.0, 0.0);
        assert!(c.integral(0.0, 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn counterexample_excess_integral() {
        let t_period = 1.0 + (1.5 - 0.5 / std::f64::consts::E).ln();
        let b = TimeFunction::piecewise_periodic(t_period, &[(0.0, 0.5), (1.0, 2.0)]).unwrap();
        let f = TimeFunction::sum(vec![TimeFunction::constant(-1.0), TimeFunction::abs(b)]);
        let v = f.integral(0.0, t_period);
        assert!((v - (-0.5 + (t_period - 1.0))).abs() < 1e-12);
        assert!(v > -0.5 && v < -0.2);
    }

    #[test]
    fn reversed_bounds_are_nan() {
        assert!(TimeFunction::constant(1.0).integral(1.0, 0.0).is_nan());
        assert_eq!(TimeFunction::constant(1.0).signed_integral(1.0, 0.0), -1.0);
    }

    #[test]
    fn piecewise_integral_across_periods() {
        let f = TimeFunction::piecewise_periodic(2.0, &[(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert!((f.integral(0.5, 4.5) - 8.0).abs() < 1e-12);
        assert!((f.integral(-2.0, 0.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_integral_of_product_matches_closed_form() {
        // ∫_0^π sin^2 = π/2 via cos·cos product.
        let c = TimeFunction::sinusoid(0.0, 1.0, 1.0, 0.0);
        let f = TimeFunction::product(vec![c.clone(), c]);
        assert!((f.integral(0.0, PI) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn table_integral_is_trapezoid() {
        let f = TimeFunction::tabulated(0.0, 1.0, vec![0.0, 2.0, 2.0], Extension::Hold, None)
            .unwrap();
        assert!((f.integral(0.0, 2.0) - 3.0).abs() < 1e-15);
        assert!((f.integral(0.5, 3.0) - (0.75 + 2.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn sawtooth_integral() {
        let s = TimeFunction::sawtooth(1.0, 0.0);
        assert!((s.integral(0.0, 3.0) - 1.5).abs() < 1e-14);
    }
}
