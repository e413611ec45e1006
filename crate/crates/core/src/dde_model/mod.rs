//! Declarative delay-equation descriptors, structural validation, coefficient
//! sums and the exponential-shift transform.

pub mod corpus;

use crate::funcmodel::{
    inf_val, sup_val, Extension, FuncError, ScanConfig, Soundness, TimeFunction, Window,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("equation has no terms")]
    NoTerms,
    #[error("empty index set")]
    EmptySubset,
    #[error("term index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("equation has no non-delay term")]
    NoNonDelayTerm,
    #[error("equation has more than one non-delay term")]
    SeveralNonDelayTerms,
    #[error("shift parameter must be positive, got {0}")]
    NonPositiveShift(f64),
    #[error("invalid equation: {0}")]
    Invalid(String),
    #[error("unknown corpus entry '{0}'")]
    UnknownCorpus(String),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Sign with which a term enters `x' + Σ ± a_j(t) x(h_j(t)) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignTag {
    Plus,
    Minus,
}

impl SignTag {
    pub fn factor(self) -> f64 {
        match self {
            SignTag::Plus => 1.0,
            SignTag::Minus => -1.0,
        }
    }
}

/// Delay `τ(t) = t - h(t) >= 0` together with a declared upper bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub lag: TimeFunction,
    pub lag_bound: f64,
}

impl DelaySpec {
    /// Delay with the bound computed from the descriptor.
    pub fn new(lag: TimeFunction) -> Self {
        let bound = sup_val(&lag, Window::halfline(0.0), &ScanConfig::default()).value;
        Self {
            lag,
            lag_bound: bound.max(0.0),
        }
    }

    pub fn constant(tau: f64) -> Self {
        Self {
            lag: TimeFunction::constant(tau),
            lag_bound: tau.max(0.0),
        }
    }

    pub fn with_bound(lag: TimeFunction, lag_bound: f64) -> Self {
        Self { lag, lag_bound }
    }

    /// The lag is identically zero (a non-delay term).
    pub fn is_zero(&self) -> bool {
        self.lag.simplified() == TimeFunction::zero()
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.lag.simplified().as_constant()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub coef: TimeFunction,
    pub delay: DelaySpec,
    pub sign: SignTag,
}

impl LinearTerm {
    pub fn new(coef: TimeFunction, delay: DelaySpec, sign: SignTag) -> Self {
        Self { coef, delay, sign }
    }

    pub fn plus(coef: TimeFunction, delay: DelaySpec) -> Self {
        Self::new(coef, delay, SignTag::Plus)
    }

    pub fn minus(coef: TimeFunction, delay: DelaySpec) -> Self {
        Self::new(coef, delay, SignTag::Minus)
    }

    /// Coefficient with the sign tag applied.
    pub fn signed_coef(&self) -> TimeFunction {
        match self.sign {
            SignTag::Plus => self.coef.clone(),
            SignTag::Minus => TimeFunction::scaled(-1.0, self.coef.clone()).simplified(),
        }
    }
}

/// `x'(t) + Σ_j s_j a_j(t) x(t - τ_j(t)) = 0` for `t >= t0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearDDE {
    pub t0: f64,
    pub terms: Vec<LinearTerm>,
}

impl LinearDDE {
    pub fn new(t0: f64, terms: Vec<LinearTerm>) -> Self {
        Self { t0, terms }
    }

    pub fn tau_max(&self) -> f64 {
        self.terms.iter().map(|t| t.delay.lag_bound).fold(0.0, f64::max)
    }

    /// Default finite-scan configuration for this equation.
    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig::for_lag_bound(self.tau_max())
    }

    pub fn non_delay_terms(&self) -> Vec<usize> {
        (0..self.terms.len())
            .filter(|&j| self.terms[j].delay.is_zero())
            .collect()
    }
}

/// `r(u) = f(t,u) / (coef(t)·u)` for the nonlinear terms supported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioShape {
    One,
    /// `1 + 1/(1 + u²)`
    MackeyGainLow,
    /// `1/(1 + u²)`
    MackeySuppress,
    /// Piecewise-linear in `u` on a uniform grid; valid only on the grid.
    UserTabulated {
        u_start: f64,
        u_step: f64,
        values: Vec<f64>,
    },
}

impl RatioShape {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            RatioShape::One => 1.0,
            RatioShape::MackeyGainLow => 1.0 + 1.0 / (1.0 + u * u),
            RatioShape::MackeySuppress => 1.0 / (1.0 + u * u),
            RatioShape::UserTabulated {
                u_start,
                u_step,
                values,
            } => {
                let s = (u - u_start) / u_step;
                let last = (values.len() - 1) as f64;
                if !(s >= -1e-12 && s <= last + 1e-12) {
                    return f64::NAN;
                }
                let s = s.clamp(0.0, last);
                let i = (s.floor() as usize).min(values.len() - 2);
                let fr = s - i as f64;
                values[i] + fr * (values[i + 1] - values[i])
            }
        }
    }

    /// Interval of `u` on which the shape is defined.
    pub fn validity(&self) -> (f64, f64) {
        match self {
            RatioShape::UserTabulated {
                u_start,
                u_step,
                values,
            } => (*u_start, u_start + u_step * (values.len() - 1) as f64),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RatioShape::One => "one",
            RatioShape::MackeyGainLow => "mackey_gain_low",
            RatioShape::MackeySuppress => "mackey_suppress",
            RatioShape::UserTabulated { .. } => "table",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearTerm {
    pub coef: TimeFunction,
    pub delay: DelaySpec,
    pub ratio: RatioShape,
}

/// `x'(t) + Σ_j coef_j(t) · u · r_j(u) = 0` with `u = x(t - τ_j(t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearDDE {
    pub t0: f64,
    pub terms: Vec<NonlinearTerm>,
}

impl NonlinearDDE {
    pub fn tau_max(&self) -> f64 {
        self.terms.iter().map(|t| t.delay.lag_bound).fold(0.0, f64::max)
    }

    /// `f_j(t, u)`.
    pub fn term_value(&self, j: usize, t: f64, u: f64) -> f64 {
        let term = &self.terms[j];
        term.coef.eval(t) * u * term.ratio.eval(u)
    }

    /// The same equation read as linear when every ratio shape is `One`.
    pub fn as_linear(&self) -> Option<LinearDDE> {
        self.terms
            .iter()
            .all(|t| t.ratio == RatioShape::One)
            .then(|| LinearDDE {
                t0: self.t0,
                terms: self
                    .terms
                    .iter()
                    .map(|t| LinearTerm::plus(t.coef.clone(), t.delay.clone()))
                    .collect(),
            })
    }
}

impl From<&LinearDDE> for NonlinearDDE {
    fn from(eq: &LinearDDE) -> Self {
        NonlinearDDE {
            t0: eq.t0,
            terms: eq
                .terms
                .iter()
                .map(|t| NonlinearTerm {
                    coef: t.signed_coef(),
                    delay: t.delay.clone(),
                    ratio: RatioShape::One,
                })
                .collect(),
        }
    }
}

/// Either kind of equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Equation {
    Linear(LinearDDE),
    Nonlinear(NonlinearDDE),
}

impl Equation {
    pub fn t0(&self) -> f64 {
        match self {
            Equation::Linear(e) => e.t0,
            Equation::Nonlinear(e) => e.t0,
        }
    }

    pub fn tau_max(&self) -> f64 {
        match self {
            Equation::Linear(e) => e.tau_max(),
            Equation::Nonlinear(e) => e.tau_max(),
        }
    }
}

/// `x(t) = ψ(t)` for `t < t0`, `x(t0) = value_at_t0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub psi: TimeFunction,
    pub value_at_t0: f64,
}

impl InitialCondition {
    /// Continuous initial data: the value at `t0` is `ψ(t0)`.
    pub fn from_function(psi: TimeFunction, t0: f64) -> Self {
        let v = psi.eval(t0);
        Self {
            psi,
            value_at_t0: v,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            psi: TimeFunction::constant(c),
            value_at_t0: c,
        }
    }

    /// Zero history with unit value at the initial point.
    pub fn fundamental() -> Self {
        Self {
            psi: TimeFunction::zero(),
            value_at_t0: 1.0,
        }
    }

    /// Bound on `|ψ|` over `[t0 - tau_max, t0]` together with `|x(t0)|`.
    pub fn sup_abs(&self, t0: f64, tau_max: f64) -> f64 {
        let e = self.psi.enclose(t0 - tau_max, t0).abs();
        e.hi.max(self.value_at_t0.abs())
    }

    pub fn validate(&self, t0: f64, tau_max: f64) -> Result<(), ModelError> {
        self.psi.validate()?;
        if !self.value_at_t0.is_finite() {
            return Err(ModelError::Invalid("initial value must be finite".into()));
        }
        if !self.sup_abs(t0, tau_max).is_finite() {
            return Err(ModelError::Invalid(
                "initial function must be bounded on its segment".into(),
            ));
        }
        Ok(())
    }
}

/// Structural classes recognised by the test registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructuralClass {
    OneDelay,
    TwoTerm,
    HasNonDelayTerm,
    MixedSign,
    Autonomous,
}

impl fmt::Display for StructuralClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StructuralClass::OneDelay => "one-delay",
            StructuralClass::TwoTerm => "two-term",
            StructuralClass::HasNonDelayTerm => "has-non-delay-term",
            StructuralClass::MixedSign => "mixed-sign",
            StructuralClass::Autonomous => "autonomous",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    /// Offending term index, if the issue is term-specific.
    pub term: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
    pub classes: BTreeSet<StructuralClass>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<ValidationReport, ModelError> {
        if self.is_valid() {
            Ok(self)
        } else {
            let msg = self
                .issues
                .iter()
                .map(|i| match i.term {
                    Some(j) => format!("term {j}: {}", i.message),
                    None => i.message.clone(),
                })
                .collect::<Vec<_>>()
                .join("; ");
            Err(ModelError::Invalid(msg))
        }
    }
}

fn check_term_descriptors(
    j: usize,
    coef: &TimeFunction,
    delay: &DelaySpec,
    t0: f64,
    scan: &ScanConfig,
    issues: &mut Vec<ValidationIssue>,
) {
    let mut push = |m: String| {
        issues.push(ValidationIssue {
            term: Some(j),
            message: m,
        })
    };
    for (what, f) in [("coefficient", coef), ("lag", &delay.lag)] {
        if let Err(e) = f.validate() {
            push(format!("{what}: {e}"));
            return;
        }
        if uses_bounded_table(f) {
            push(format!(
                "{what}: tabulated data with 'error' extension does not cover [t0, ∞)"
            ));
        }
    }
    let w = Window::halfline(t0);
    let lag_inf = inf_val(&delay.lag, w, scan);
    if lag_inf.value < -1e-12 {
        push(format!("negative lag (infimum {})", lag_inf.value));
    }
    let lag_sup = sup_val(&delay.lag, w, scan);
    if !lag_sup.value.is_finite() {
        push("unbounded lag".into());
    } else if lag_sup.soundness != Soundness::Heuristic || lag_sup.value > delay.lag_bound {
        if lag_sup.value > delay.lag_bound + 1e-12 * delay.lag_bound.abs().max(1.0) {
            push(format!(
                "lag exceeds its declared bound ({} > {})",
                lag_sup.value, delay.lag_bound
            ));
        }
    }
    if !(delay.lag_bound >= 0.0 && delay.lag_bound.is_finite()) {
        push("lag bound must be finite and nonnegative".into());
    }
}

fn uses_bounded_table(f: &TimeFunction) -> bool {
    if let TimeFunction::Tabulated { table } = f {
        if table.extension == Extension::Error {
            return true;
        }
    }
    f.children().into_iter().any(uses_bounded_table)
}

fn is_constant(f: &TimeFunction) -> bool {
    f.simplified().as_constant().is_some()
}

/// Structural checks shared by the linear and nonlinear descriptors.
pub fn validate_linear(eq: &LinearDDE) -> ValidationReport {
    let mut issues = Vec::new();
    let scan = eq.scan_config();
    if eq.terms.is_empty() {
        issues.push(ValidationIssue {
            term: None,
            message: "equation needs at least one term".into(),
        });
    }
    if !eq.t0.is_finite() {
        issues.push(ValidationIssue {
            term: None,
            message: "t0 must be finite".into(),
        });
    }
    for (j, term) in eq.terms.iter().enumerate() {
        check_term_descriptors(j, &term.coef, &term.delay, eq.t0, &scan, &mut issues);
    }
    let mut classes = BTreeSet::new();
    let n = eq.terms.len();
    if n == 1 && !eq.terms[0].delay.is_zero() {
        classes.insert(StructuralClass::OneDelay);
    }
    if n == 2 {
        classes.insert(StructuralClass::TwoTerm);
    }
    if eq.terms.iter().any(|t| t.delay.is_zero()) {
        classes.insert(StructuralClass::HasNonDelayTerm);
    }
    if eq.terms.iter().any(|t| t.sign == SignTag::Plus)
        && eq.terms.iter().any(|t| t.sign == SignTag::Minus)
    {
        classes.insert(StructuralClass::MixedSign);
    }
    if n > 0
        && eq
            .terms
            .iter()
            .all(|t| is_constant(&t.coef) && is_constant(&t.delay.lag))
    {
        classes.insert(StructuralClass::Autonomous);
    }
    ValidationReport { issues, classes }
}

pub fn validate_nonlinear(eq: &NonlinearDDE) -> ValidationReport {
    let as_linear = LinearDDE {
        t0: eq.t0,
        terms: eq
            .terms
            .iter()
            .map(|t| LinearTerm::plus(t.coef.clone(), t.delay.clone()))
            .collect(),
    };
    let mut report = validate_linear(&as_linear);
    for (j, term) in eq.terms.iter().enumerate() {
        if let RatioShape::UserTabulated {
            u_step, values, ..
        } = &term.ratio
        {
            if !(*u_step > 0.0) || values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
                report.issues.push(ValidationIssue {
                    term: Some(j),
                    message: "tabulated ratio needs a positive step, two or more finite values"
                        .into(),
                });
            }
        }
    }
    report
}

/// Validate either kind of equation.
pub fn validate(eq: &Equation) -> ValidationReport {
    match eq {
        Equation::Linear(e) => validate_linear(e),
        Equation::Nonlinear(e) => validate_nonlinear(e),
    }
}

/// `A_Ω(t) = Σ_{j ∈ Ω} s_j a_j(t)` with sign tags applied.
pub fn sum_coefficients(eq: &LinearDDE, omega: &[usize]) -> Result<TimeFunction, ModelError> {
    if omega.is_empty() {
        return Err(ModelError::EmptySubset);
    }
    let mut terms = Vec::with_capacity(omega.len());
    for &j in omega {
        let term = eq.terms.get(j).ok_or(ModelError::IndexOutOfRange(j))?;
        terms.push(term.signed_coef());
    }
    Ok(TimeFunction::sum(terms).simplified())
}

/// `A(t)`: the signed sum of all coefficients.
pub fn total_coefficient(eq: &LinearDDE) -> Result<TimeFunction, ModelError> {
    let all: Vec<usize> = (0..eq.terms.len()).collect();
    sum_coefficients(eq, &all)
}

/// Transform `x' + α x + Σ b_j x(h_j) = 0` into the equation for
/// `y(t) = e^{λ(t - t0)} x(t)`:
/// `y' + (α - λ) y + Σ b_j e^{λ(t - h_j)} y(h_j) = 0`.
pub fn exponential_shift(eq: &LinearDDE, lambda: f64) -> Result<LinearDDE, ModelError> {
    if !(lambda > 0.0) {
        return Err(ModelError::NonPositiveShift(lambda));
    }
    let nd = eq.non_delay_terms();
    match nd.len() {
        0 => return Err(ModelError::NoNonDelayTerm),
        1 => {}
        _ => return Err(ModelError::SeveralNonDelayTerms),
    }
    let terms = eq
        .terms
        .iter()
        .enumerate()
        .map(|(j, term)| {
            if j == nd[0] {
                let alpha = term.signed_coef();
                LinearTerm::plus(
                    TimeFunction::sum(vec![alpha, TimeFunction::constant(-lambda)]).simplified(),
                    term.delay.clone(),
                )
            } else {
                let factor = TimeFunction::exp(lambda, term.delay.lag.clone());
                LinearTerm::new(
                    TimeFunction::product(vec![term.coef.clone(), factor]).simplified(),
                    term.delay.clone(),
                    term.sign,
                )
            }
        })
        .collect();
    Ok(LinearDDE { t0: eq.t0, terms })
}

/// Initial data for the shifted equation: `e^{λ(t - t0)} ψ(t)`.
pub fn shift_initial_condition(ic: &InitialCondition, t0: f64, lambda: f64) -> InitialCondition {
    // e^{λ(t - t0)} = exp(λ · (t - t0)) expressed through a sawtooth-free
    // linear ramp: use the antiderivative of the constant 1 from t0.
    let ramp = TimeFunction::antiderivative(TimeFunction::constant(1.0), t0);
    InitialCondition {
        psi: TimeFunction::product(vec![ic.psi.clone(), TimeFunction::exp(lambda, ramp)]),
        value_at_t0: ic.value_at_t0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_equation_is_two_term() {
        let r = validate_linear(&corpus::c2());
        assert!(r.is_valid(), "{:?}", r.issues);
        assert_eq!(r.classes, BTreeSet::from([StructuralClass::TwoTerm]));
    }

    #[test]
    fn negative_lag_is_reported_with_index() {
        let eq = LinearDDE::new(
            0.0,
            vec![
                LinearTerm::plus(TimeFunction::constant(1.0), DelaySpec::constant(0.2)),
                LinearTerm::plus(
                    TimeFunction::constant(1.0),
                    DelaySpec::with_bound(TimeFunction::constant(-0.1), 0.0),
                ),
            ],
        );
        let r = validate_linear(&eq);
        assert!(!r.is_valid());
        assert!(r.issues.iter().any(|i| i.term == Some(1) && i.message.contains("negative lag")));
    }

    #[test]
    fn non_delay_form_classes() {
        let eq = LinearDDE::new(
            0.0,
            vec![
                LinearTerm::plus(TimeFunction::sinusoid(2.0, 1.0, 1.0, 0.0), DelaySpec::constant(0.0)),
                LinearTerm::minus(TimeFunction::constant(0.5), DelaySpec::constant(1.0)),
            ],
        );
        let r = validate_linear(&eq);
        assert!(r.is_valid());
        assert!(r.classes.contains(&StructuralClass::TwoTerm));
        assert!(r.classes.contains(&StructuralClass::HasNonDelayTerm));
        assert!(r.classes.contains(&StructuralClass::MixedSign));
    }

    #[test]
    fn validation_is_idempotent() {
        let eq = corpus::c4();
        assert_eq!(validate_linear(&eq), validate_linear(&eq));
    }

    #[test]
    fn coefficient_sums() {
        let eq = corpus::c2();
        assert_eq!(sum_coefficients(&eq, &[0, 1]).unwrap(), TimeFunction::constant(1.0));
        assert_eq!(sum_coefficients(&eq, &[0]).unwrap(), eq.terms[0].coef);
        assert!(matches!(sum_coefficients(&eq, &[]), Err(ModelError::EmptySubset)));
        let auto = corpus::c6();
        assert_eq!(total_coefficient(&auto).unwrap(), TimeFunction::constant(1.0));
    }

    #[test]
    fn shift_of_constant_equation() {
        let eq = LinearDDE::new(
            0.0,
            vec![
                LinearTerm::plus(TimeFunction::constant(1.0), DelaySpec::constant(0.0)),
                LinearTerm::plus(TimeFunction::constant(0.4), DelaySpec::constant(1.0)),
            ],
        );
        let s = exponential_shift(&eq, 0.1).unwrap();
        assert_eq!(s.terms[0].coef, TimeFunction::constant(0.9));
        let b = s.terms[1].coef.as_constant().unwrap();
        assert!((b - 0.4 * 0.1f64.exp()).abs() < 1e-15);
        assert!(matches!(exponential_shift(&eq, 0.0), Err(ModelError::NonPositiveShift(_))));
        assert!(matches!(
            exponential_shift(&corpus::c6(), 0.1),
            Err(ModelError::NoNonDelayTerm)
        ));
    }

    #[test]
    fn vanishing_shift_approaches_identity() {
        let eq = corpus::c4();
        let s = exponential_shift(&eq, 1e-12).unwrap();
        for k in 0..20 {
            let t = 0.5 * k as f64;
            for j in 0..2 {
                let d = s.terms[j].signed_coef().eval(t) - eq.terms[j].signed_coef().eval(t);
                assert!(d.abs() < 1e-10);
            }
        }
    }
}
