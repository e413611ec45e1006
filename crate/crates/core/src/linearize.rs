//! Global linearised stability: enclose the ratio `f_j(t,u)/u` of each
//! nonlinear term, build the interval linear equation and certify it with
//! interval-capable catalog tests. If that family is uniformly exponentially
//! stable for every selection of coefficients inside the enclosure, the
//! nonlinear equation is globally exponentially stable on the a-priori range.

use crate::catalog::model::{EqModel, ModelTerm};
use crate::catalog::{
    evaluate_model, ext_float, sort_verdicts, test_info, verdict_from_error, CatalogError, Conclusion,
    RunOptions, Verdict, VerdictSoundness, REGISTRY,
};
use crate::dde_model::{validate_nonlinear, DelaySpec, NonlinearDDE, RatioShape, SignTag};
use crate::funcmodel::{IntervalFunction, TimeFunction};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearizeError {
    #[error("empty or invalid value interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
    #[error("value interval [{a}, {b}] leaves the tabulated range [{lo}, {hi}]")]
    OutsideValidity { a: f64, b: f64, lo: f64, hi: f64 },
    #[error("no ratio range supplied for term {0}")]
    MissingRange(usize),
    #[error("invalid equation: {0}")]
    InvalidEquation(String),
}

/// Range `[lo, hi]` of the `u`-only factor `r_j(u)` of term `j` for values
/// `u` in `validity`; the time factor `coef_j(t)` is kept separately.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub term: usize,
    #[serde(with = "ext_float")]
    pub lo: f64,
    #[serde(with = "ext_float")]
    pub hi: f64,
    #[serde(with = "ext_float::pair")]
    pub validity: (f64, f64),
}

/// Exact range of a catalog ratio shape over `[a, b]` (infinite endpoints
/// allowed); the value at `u = 0` is the shape's continuous extension.
pub fn ratio_range(shape: &RatioShape, interval: (f64, f64)) -> Result<(f64, f64), LinearizeError> {
    let (a, b) = interval;
    if a.is_nan() || b.is_nan() || a > b {
        return Err(LinearizeError::EmptyInterval(a, b));
    }
    let contains_zero = a <= 0.0 && b >= 0.0;
    let max_sq = a.abs().max(b.abs()).powi(2);
    let min_sq = if contains_zero { 0.0 } else { a.abs().min(b.abs()).powi(2) };
    Ok(match shape {
        RatioShape::One => (1.0, 1.0),
        RatioShape::MackeyGainLow => (1.0 + 1.0 / (1.0 + max_sq), 1.0 + 1.0 / (1.0 + min_sq)),
        RatioShape::MackeySuppress => (1.0 / (1.0 + max_sq), 1.0 / (1.0 + min_sq)),
        RatioShape::UserTabulated { u_start, u_step, values } => {
            let (lo, hi) = shape.validity();
            if a < lo - 1e-12 || b > hi + 1e-12 {
                return Err(LinearizeError::OutsideValidity { a, b, lo, hi });
            }
            // Piecewise linear: the extremes sit at grid nodes or endpoints.
            let mut r = (shape.eval(a), shape.eval(a));
            let mut push = |v: f64| {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            };
            push(shape.eval(b));
            for (i, v) in values.iter().enumerate() {
                let u = u_start + u_step * i as f64;
                if u > a && u < b {
                    push(*v);
                }
            }
            r
        }
    })
}

/// Default a-priori range: the whole line when every shape has a global
/// range, otherwise the intersection of the tabulated validity intervals.
pub fn default_bounds(eq: &NonlinearDDE) -> (f64, f64) {
    eq.terms.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), t| {
        let (lo, hi) = t.ratio.validity();
        (a.max(lo), b.min(hi))
    })
}

/// Ratio ranges of every term over `bounds`.
pub fn ratio_ranges(eq: &NonlinearDDE, bounds: (f64, f64)) -> Result<Vec<RatioRange>, LinearizeError> {
    eq.terms
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let (lo, hi) = ratio_range(&t.ratio, bounds)?;
            Ok(RatioRange { term: j, lo, hi, validity: bounds })
        })
        .collect()
}

/// One term `c(t) x(t - lag(t))` with `c(t) ∈ [lower(t), upper(t)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalTerm {
    pub coef: IntervalFunction,
    pub delay: DelaySpec,
}

/// `x' + Σ c_j(t) x(t - lag_j(t)) = 0` with enclosed coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalLinearDDE {
    pub t0: f64,
    pub terms: Vec<IntervalTerm>,
}

impl IntervalLinearDDE {
    pub fn is_degenerate(&self) -> bool {
        self.terms.iter().all(|t| t.coef.lower == t.coef.upper)
    }

    pub(crate) fn to_model(&self) -> EqModel {
        EqModel::from_terms(
            self.t0,
            self.terms
                .iter()
                .map(|t| ModelTerm {
                    sign: SignTag::Plus,
                    c_lo: t.coef.lower.clone(),
                    c_hi: t.coef.upper.clone(),
                    lag: t.delay.lag.simplified(),
                    lag_bound: t.delay.lag_bound,
                    instantaneous: t.delay.is_zero(),
                })
                .collect(),
        )
    }
}

/// Enclosure `[r_lo coef, r_hi coef]` of `c_j(t) = coef_j(t) r_j(x)`, with the
/// order taken pointwise so that sign changes of `coef_j` are covered.
fn enclose_term(coef: &TimeFunction, lo: f64, hi: f64) -> IntervalFunction {
    let coef = coef.simplified();
    let scaled = |k: f64| {
        if k == 1.0 {
            coef.clone()
        } else {
            TimeFunction::scaled(k, coef.clone()).simplified()
        }
    };
    if lo == hi {
        return IntervalFunction::point(scaled(lo));
    }
    if coef.is_nonnegative_structurally() {
        return IntervalFunction { lower: scaled(lo), upper: scaled(hi) };
    }
    if TimeFunction::scaled(-1.0, coef.clone()).simplified().is_nonnegative_structurally() {
        return IntervalFunction { lower: scaled(hi), upper: scaled(lo) };
    }
    IntervalFunction {
        lower: TimeFunction::min_of(vec![scaled(lo), scaled(hi)]).simplified(),
        upper: TimeFunction::max_of(vec![scaled(lo), scaled(hi)]).simplified(),
    }
}

/// Builds the associated interval linear equation.
pub fn build_interval_linearization(
    eq: &NonlinearDDE,
    ranges: &[RatioRange],
) -> Result<IntervalLinearDDE, LinearizeError> {
    let terms = eq
        .terms
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let r = ranges.iter().find(|r| r.term == j).ok_or(LinearizeError::MissingRange(j))?;
            Ok(IntervalTerm { coef: enclose_term(&t.coef, r.lo, r.hi), delay: t.delay.clone() })
        })
        .collect::<Result<Vec<_>, LinearizeError>>()?;
    Ok(IntervalLinearDDE { t0: eq.t0, terms })
}

/// Ids of the interval-capable tests.
pub fn interval_capable_tests() -> Vec<&'static str> {
    REGISTRY.iter().filter(|t| t.interval_capable).map(|t| t.id).collect()
}

/// Evaluates the selected tests on the interval linearisation and returns
/// every verdict (canonical order) together with the global verdict.
pub fn evaluate_linearization(
    eq: &NonlinearDDE,
    ranges: &[RatioRange],
    selection: &[&str],
    opts: &RunOptions,
) -> Result<(Verdict, Vec<Verdict>), CatalogError> {
    let report = validate_nonlinear(eq);
    if !report.is_valid() {
        let msg: Vec<String> = report.issues.iter().map(|i| i.message.clone()).collect();
        return Err(CatalogError::NotApplicable(format!("invalid equation: {}", msg.join("; "))));
    }
    let ids: Vec<&str> = if selection.is_empty() { interval_capable_tests() } else { selection.to_vec() };
    for id in &ids {
        let info = test_info(id).ok_or_else(|| CatalogError::UnknownTest(id.to_string()))?;
        if !info.interval_capable {
            return Err(CatalogError::NotIntervalCapable(id.to_string()));
        }
    }
    let lin = build_interval_linearization(eq, ranges)
        .map_err(|e| CatalogError::InvalidParameter(e.to_string()))?;
    let mut model = lin.to_model();
    model.apply_scan(opts);
    let mut all: Vec<Verdict> = ids
        .iter()
        .map(|id| evaluate_model(id, &model, opts).unwrap_or_else(|e| verdict_from_error(id, e)))
        .collect();
    sort_verdicts(&mut all);
    let enclosure: Vec<String> = ranges
        .iter()
        .map(|r| format!("term {}: ratio in [{}, {}] for x in [{}, {}]", r.term + 1, r.lo, r.hi, r.validity.0, r.validity.1))
        .collect();
    let exponential = |v: &&Verdict| matches!(v.conclusion, Conclusion::Ues | Conclusion::Ges);
    let sound = all.iter().filter(exponential).find(|v| v.soundness == VerdictSoundness::Sound);
    let global = match sound {
        Some(v) => {
            let mut g = v.clone();
            g.conclusion = Conclusion::Ges;
            g.notes.push(format!(
                "global exponential stability: the linearised family is uniformly exponentially stable for every coefficient selection ({})",
                enclosure.join("; ")
            ));
            g
        }
        None => {
            if all.iter().any(|v| exponential(&v)) {
                return Err(CatalogError::HeuristicBoundsOnly(
                    "only heuristic bounds certify the linearised family".into(),
                ));
            }
            let mut g = all.first().cloned().unwrap_or_else(|| {
                Verdict::not_applicable("none", "no test selected".into())
            });
            if g.conclusion != Conclusion::Inconclusive {
                g.notes.push(format!(
                    "{} of the linearised family does not transfer to the nonlinear equation",
                    g.conclusion
                ));
                g.conclusion = Conclusion::Inconclusive;
                g.margin = g.margin.min(0.0);
            }
            g.notes.push(format!("no selected test certifies the linearised family ({})", enclosure.join("; ")));
            g
        }
    };
    Ok((global, all))
}

/// Global stability verdict for a nonlinear equation over the ratio ranges.
pub fn check_global_stability(
    eq: &NonlinearDDE,
    ranges: &[RatioRange],
    selection: &[&str],
    opts: &RunOptions,
) -> Result<Verdict, CatalogError> {
    evaluate_linearization(eq, ranges, selection, opts).map(|(g, _)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{evaluate, OmegaMode};
    use crate::dde_model::corpus::c5;
    use crate::dde_model::NonlinearTerm;
    use rand::{Rng, SeedableRng};

    const R: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

    #[test]
    fn ratio_range_examples() {
        assert_eq!(ratio_range(&RatioShape::MackeyGainLow, R).unwrap(), (1.0, 2.0));
        assert_eq!(ratio_range(&RatioShape::MackeySuppress, R).unwrap(), (0.0, 1.0));
        assert_eq!(ratio_range(&RatioShape::One, (-3.0, 5.0)).unwrap(), (1.0, 1.0));
        assert_eq!(ratio_range(&RatioShape::MackeySuppress, (1.0, 2.0)).unwrap(), (0.2, 0.5));
        assert!(ratio_range(&RatioShape::One, (2.0, 1.0)).is_err());
        let tab = RatioShape::UserTabulated { u_start: -1.0, u_step: 1.0, values: vec![0.5, 2.0, 1.0] };
        assert_eq!(ratio_range(&tab, (-1.0, 1.0)).unwrap(), (0.5, 2.0));
        assert_eq!(ratio_range(&tab, (0.5, 1.0)).unwrap(), (1.0, 1.5));
        assert!(ratio_range(&tab, (-2.0, 1.0)).is_err());
    }

    #[test]
    fn c5_enclosure() {
        let eq = c5();
        let lin = build_interval_linearization(&eq, &ratio_ranges(&eq, R).unwrap()).unwrap();
        assert_eq!(lin.terms[0].coef.lower.as_constant(), Some(1.0));
        assert_eq!(lin.terms[0].coef.upper.as_constant(), Some(2.0));
        assert_eq!(lin.terms[1].coef.lower.as_constant(), Some(0.0));
        assert_eq!(lin.terms[1].coef.upper.as_constant(), Some(0.5));
        let mut neg = eq.clone();
        neg.terms[1].coef = TimeFunction::constant(-0.5);
        let lin = build_interval_linearization(&neg, &ratio_ranges(&neg, R).unwrap()).unwrap();
        assert_eq!(lin.terms[1].coef.lower.as_constant(), Some(-0.5));
        assert_eq!(lin.terms[1].coef.upper.as_constant(), Some(0.0));
        assert!(matches!(
            build_interval_linearization(&eq, &[]),
            Err(LinearizeError::MissingRange(0))
        ));
    }

    #[test]
    fn c5_global_stability() {
        let eq = c5();
        let ranges = ratio_ranges(&eq, R).unwrap();
        let opts = RunOptions { omega: OmegaMode::Subset(vec![0]), ..RunOptions::default() };
        let v = check_global_stability(&eq, &ranges, &["TH2-6"], &opts).unwrap();
        assert_eq!(v.conclusion, Conclusion::Ges);
        assert!((v.margin - 0.25).abs() < 1e-9, "{}", v.margin);
        let v = check_global_stability(&eq, &ranges, &["COR3B-INT"], &opts).unwrap();
        assert_eq!(v.conclusion, Conclusion::Ges);
        assert!(matches!(
            check_global_stability(&eq, &ranges, &["TH6"], &opts),
            Err(CatalogError::NotIntervalCapable(_))
        ));
    }

    #[test]
    fn degenerate_enclosure_matches_linear_test() {
        let mut eq = c5();
        for t in &mut eq.terms {
            t.ratio = RatioShape::One;
        }
        let lin_eq = eq.as_linear().unwrap();
        let ranges = ratio_ranges(&eq, R).unwrap();
        let opts = RunOptions::default();
        for id in interval_capable_tests() {
            let Ok(g) = check_global_stability(&eq, &ranges, &[id], &opts) else { continue };
            let Ok(mut plain) = evaluate(id, &lin_eq, &opts) else { continue };
            let mut g2 = g.clone();
            g2.notes.clear();
            plain.notes.clear();
            match plain.conclusion {
                Conclusion::Ues | Conclusion::Ges => {
                    plain.conclusion = Conclusion::Ges;
                    assert_eq!(g2, plain, "{id}");
                }
                Conclusion::Inconclusive => assert_eq!(g2, plain, "{id}"),
                _ => assert_eq!(g.conclusion, Conclusion::Inconclusive, "{id}"),
            }
        }
    }

    #[test]
    fn enclosure_soundness() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let eq = NonlinearDDE {
            t0: 0.0,
            terms: vec![
                NonlinearTerm {
                    coef: TimeFunction::sinusoid(0.2, 1.0, 1.0, 0.0),
                    delay: DelaySpec::constant(0.1),
                    ratio: RatioShape::MackeyGainLow,
                },
                NonlinearTerm {
                    coef: TimeFunction::constant(0.5),
                    delay: DelaySpec::constant(0.2),
                    ratio: RatioShape::MackeySuppress,
                },
            ],
        };
        let bounds = (-3.0, 2.0);
        let lin = build_interval_linearization(&eq, &ratio_ranges(&eq, bounds).unwrap()).unwrap();
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(bounds.0..=bounds.1);
            let t = rng.gen_range(0.0..50.0f64);
            for (j, term) in lin.terms.iter().enumerate() {
                if u == 0.0 {
                    continue;
                }
                let c = eq.term_value(j, t, u) / u;
                let (lo, hi) = (term.coef.lower.eval(t), term.coef.upper.eval(t));
                assert!(c >= lo - 1e-12 && c <= hi + 1e-12, "term {j}: {c} not in [{lo}, {hi}]");
            }
        }
    }

    #[test]
    fn widening_never_helps() {
        let eq = c5();
        let opts = RunOptions { omega: OmegaMode::Subset(vec![0]), ..RunOptions::default() };
        let narrow = ratio_ranges(&eq, (-1.0, 1.0)).unwrap();
        let wide = ratio_ranges(&eq, R).unwrap();
        let vn = check_global_stability(&eq, &narrow, &["TH2-6"], &opts).unwrap();
        let vw = check_global_stability(&eq, &wide, &["TH2-6"], &opts).unwrap();
        assert!(vn.margin >= vw.margin);
    }
}
