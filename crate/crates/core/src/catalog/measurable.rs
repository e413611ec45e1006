//! Tests for equations with measurable (possibly oscillating) coefficients:
//! the `1 + 1/e` family, oscillating coefficients, mixed signs, perturbations,
//! two-term criteria and non-delay-term criteria.

use super::continuous::nonosc_branches;
use super::model::{decide, not_applicable, q_sum, Branch, Builder, EqModel, ModelTerm, Q};
use super::verdict::{Conclusion, Relation, Verdict};
use super::CatalogError;
use crate::dde_model::{exponential_shift, LinearDDE, SignTag};
use crate::funcmodel::{extreme, ExtremeKind, Periodicity, Soundness, TimeFunction, Window};
use std::f64::consts::E;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OneEVariant {
    Th11,
    Cor3a,
    Cor3bInt,
    Cor3bPt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OscVariant {
    Th3,
    Cor5,
    Cor5a,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OscSumVariant {
    Th13,
    Th14,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MixedVariant {
    Th8,
    Th10,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PerturbationVariant {
    Cor3Limit,
    Th18,
    Th19,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TwoTermVariant {
    Th5,
    Th7,
    Th12_1,
    Th12_2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NondelayVariant {
    Th15,
    Cor6a,
    Cor6b,
    Cor1aA,
}

const ONE_PLUS_INV_E: f64 = 1.0 + 1.0 / E;

fn model(eq: &LinearDDE) -> Result<EqModel, CatalogError> {
    EqModel::from_linear(eq)
}

fn zero() -> Q {
    Q::exact(0.0)
}

fn neg(f: TimeFunction) -> TimeFunction {
    TimeFunction::scaled(-1.0, f)
}

/// `∫_{t-lag(t)}^t f` as a function of `t`.
fn wi(f: &TimeFunction, lag: &TimeFunction) -> TimeFunction {
    TimeFunction::window_integral(f.clone(), lag.clone())
}

/// `|∫_{t-l1}^{t-l2} f|` as a function of `t`.
fn wi_gap(f: &TimeFunction, l1: &TimeFunction, l2: &TimeFunction) -> TimeFunction {
    TimeFunction::abs(TimeFunction::sum(vec![wi(f, l1), neg(wi(f, l2))]))
}

fn quot(n: TimeFunction, d: &TimeFunction) -> TimeFunction {
    TimeFunction::quotient(n, d.clone())
}

/// UES of `x' + A(t) x = 0` alternatives, one branch per window length.
fn ode_branches(m: &EqModel, a_lo: &TimeFunction, extra: &[super::model::Decided]) -> Vec<Branch> {
    m.ode_ues_alternatives(a_lo)
        .into_iter()
        .map(|(r, d)| {
            let mut b = Branch::new(format!("exponential stability window R = {r}"), Conclusion::Ues);
            for e in extra {
                b.push(e.clone());
            }
            b.with(d)
        })
        .collect()
}

// ----- 1 + 1/e family ------------------------------------------------------------

pub(crate) fn one_e(m: &EqModel, variant: OneEVariant) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if all.is_empty() {
        return not_applicable("the equation has no terms");
    }
    if !m.nonnegative(&all).0 {
        return not_applicable("a coefficient takes negative values");
    }
    let a_lo = m.sum_lo(&all);
    let a_hi = m.sum_hi(&all);
    let pointwise_products = || {
        TimeFunction::sum(
            all.iter()
                .map(|&j| TimeFunction::product(vec![m.terms[j].hi(), m.terms[j].lag.clone()]))
                .collect(),
        )
        .simplified()
    };
    match variant {
        OneEVariant::Th11 => {
            let sep = decide("inf Σa", m.inf(&a_lo), Relation::Gt, zero());
            let q = TimeFunction::sum(
                all.iter()
                    .map(|&j| {
                        TimeFunction::product(vec![
                            quot(m.terms[j].hi(), &a_lo),
                            wi(&a_hi, &m.terms[j].lag),
                        ])
                    })
                    .collect(),
            )
            .simplified();
            let main = decide(
                "limsup Σ (a_j/A) ∫_{h_j(t)}^t A",
                m.limsup(&q),
                Relation::Lt,
                Q::exact(ONE_PLUS_INV_E),
            );
            let mut b = Builder::new("TH11", Conclusion::Ues);
            b.check(sep);
            b.check(main);
            for br in ode_branches(m, &a_lo, &[]) {
                b.branch(br);
            }
            b.branch(
                Branch::new("divergent coefficient integral", Conclusion::As)
                    .with(m.divergence_check("Σa", &a_lo)),
            );
            Ok(b.finish())
        }
        OneEVariant::Cor3a => {
            let (Some(lo), Some(hi)) = (a_lo.simplified().as_constant(), a_hi.simplified().as_constant())
            else {
                return not_applicable("the coefficient sum is not constant");
            };
            if lo != hi {
                return not_applicable("the coefficient sum is not constant");
            }
            let mut b = Builder::new("COR3A", Conclusion::Ues);
            b.check(decide("Σa", Q::exact(lo), Relation::Gt, zero()));
            b.check(decide(
                "limsup Σ a_j (t - h_j(t))",
                m.limsup(&pointwise_products()),
                Relation::Lt,
                Q::exact(ONE_PLUS_INV_E),
            ));
            Ok(b.finish())
        }
        OneEVariant::Cor3bInt => {
            let mut b = Builder::new("COR3B-INT", Conclusion::Ues);
            b.check(decide("a0 = inf Σa", m.inf(&a_lo), Relation::Gt, zero()));
            b.check(decide("A = sup Σa", m.sup(&a_hi), Relation::Lt, Q::exact(f64::INFINITY)));
            b.check(decide(
                "limsup ∫_{t-max lag}^t Σa",
                m.win(&a_hi, &m.max_lag(&all), ExtremeKind::Limsup),
                Relation::Lt,
                Q::exact(ONE_PLUS_INV_E),
            ));
            Ok(b.finish())
        }
        OneEVariant::Cor3bPt => {
            let a0 = m.inf(&a_lo);
            let big_a = m.sup(&a_hi);
            let mut b = Builder::new("COR3B-PT", Conclusion::Ues);
            b.check(decide("a0 = inf Σa", a0, Relation::Gt, zero()));
            b.check(decide("A = sup Σa", big_a, Relation::Lt, Q::exact(f64::INFINITY)));
            b.check(decide(
                "limsup Σ a_j (t - h_j(t))",
                m.limsup(&pointwise_products()),
                Relation::Lt,
                a0 / big_a * ONE_PLUS_INV_E,
            ));
            Ok(b.finish())
        }
    }
}

/// Nonnegative coefficients with weighted delay integrals below `1 + 1/e`.
pub fn test_one_e_family(eq: &LinearDDE, variant: OneEVariant) -> Result<Verdict, CatalogError> {
    one_e(&model(eq)?, variant)
}

// ----- oscillating coefficients -------------------------------------------------

pub(crate) fn oscillating(
    m: &EqModel,
    variant: OscVariant,
    r_lag: Option<&TimeFunction>,
) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if all.is_empty() {
        return not_applicable("the equation has no terms");
    }
    let a_lo = m.sum_lo(&all);
    let a_hi = m.sum_hi(&all);
    let s_abs = m.sum_abs(&all);
    let sep = decide("inf Σa", m.inf(&a_lo), Relation::Gt, zero());
    match variant {
        OscVariant::Cor5 => {
            let q = TimeFunction::sum(
                all.iter()
                    .map(|&j| {
                        TimeFunction::product(vec![
                            quot(m.terms[j].abs_env(), &a_lo),
                            wi(&s_abs, &m.terms[j].lag),
                        ])
                    })
                    .collect(),
            )
            .simplified();
            let mut b = Builder::new("COR5", Conclusion::Ues);
            b.check(sep);
            b.check(decide(
                "limsup Σ (|a_j|/A) ∫_{h_j(t)}^t Σ|a_k|",
                m.limsup(&q),
                Relation::Lt,
                Q::exact(1.0),
            ));
            Ok(b.finish())
        }
        OscVariant::Th3 => {
            let mut b = Builder::new("TH3", Conclusion::Ues);
            let rho = match r_lag {
                Some(r) => r.clone(),
                None => {
                    let sup_a = m.sup(&a_hi);
                    if !(sup_a.v > 0.0 && sup_a.v.is_finite()) {
                        return not_applicable("the coefficient sum is not positive and bounded");
                    }
                    b.note(format!("auxiliary argument r(t) = t - {:.6}", 1.0 / (E * sup_a.v)));
                    TimeFunction::constant(1.0 / (E * sup_a.v))
                }
            };
            let q = TimeFunction::sum(
                all.iter()
                    .map(|&j| {
                        TimeFunction::product(vec![
                            quot(m.terms[j].abs_env(), &a_lo),
                            wi_gap(&s_abs, &m.terms[j].lag, &rho),
                        ])
                    })
                    .collect(),
            )
            .simplified();
            b.check(sep);
            b.check(decide(
                "sup ∫_{r(t)}^t Σa",
                m.win(&a_hi, &rho, ExtremeKind::Sup),
                Relation::Le,
                Q::exact(1.0 / E),
            ));
            b.check(decide(
                "limsup Σ (|a_j|/A) |∫_{h_j(t)}^{r(t)} Σ|a_k||",
                m.limsup(&q),
                Relation::Lt,
                Q::exact(1.0),
            ));
            Ok(b.finish())
        }
        OscVariant::Cor5a => {
            let mut coefs = Vec::new();
            let mut lags = Vec::new();
            for t in &m.terms {
                match (t.lo().as_constant().filter(|_| t.is_point()), t.lag.as_constant()) {
                    (Some(c), Some(l)) => {
                        coefs.push(c);
                        lags.push(l);
                    }
                    _ => return not_applicable("coefficients and delays must be constant"),
                }
            }
            let sum: f64 = coefs.iter().sum();
            let abs: f64 = coefs.iter().map(|c| c.abs()).sum();
            let lhs: f64 = coefs.iter().zip(&lags).map(|(c, l)| c.abs() * l).sum();
            let mut b = Builder::new("COR5A", Conclusion::Ues);
            b.check(decide("Σa", Q::exact(sum), Relation::Gt, zero()));
            b.check(decide(
                "Σ |a_j| σ_j",
                Q::exact(lhs),
                Relation::Le,
                Q::exact(if abs > 0.0 { sum / abs } else { 0.0 }),
            ));
            Ok(b.finish())
        }
    }
}

/// Coefficients of any sign with a positive sum.
pub fn test_oscillating_coeff(
    eq: &LinearDDE,
    variant: OscVariant,
    r_lag: Option<&TimeFunction>,
) -> Result<Verdict, CatalogError> {
    oscillating(&model(eq)?, variant, r_lag)
}

/// Model with every coefficient replaced by its positive part.
fn positive_part_model(m: &EqModel, idx: &[usize]) -> EqModel {
    EqModel {
        t0: m.t0,
        scan: m.scan,
        terms: idx
            .iter()
            .map(|&j| {
                let t = &m.terms[j];
                ModelTerm {
                    sign: SignTag::Plus,
                    c_lo: TimeFunction::positive_part(t.lo()).simplified(),
                    c_hi: TimeFunction::positive_part(t.hi()).simplified(),
                    lag: t.lag.clone(),
                    lag_bound: t.lag_bound,
                    instantaneous: t.instantaneous,
                }
            })
            .collect(),
    }
}

pub(crate) fn positive_part(m: &EqModel) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if all.is_empty() {
        return not_applicable("the equation has no terms");
    }
    let pm = positive_part_model(m, &all);
    let mut b = Builder::new("TH6", Conclusion::Ues);
    b.check(decide("inf Σa", m.inf(&m.sum_lo(&all)), Relation::Gt, zero()));
    for br in nonosc_branches(&pm, &pm.all(), Conclusion::Ues) {
        b.branch(br);
    }
    b.note("the positive-part equation has a positive fundamental function");
    Ok(b.finish())
}

/// Positive-part equation nonoscillatory and positive coefficient sum.
pub fn test_positive_part(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    positive_part(&model(eq)?)
}

// ----- oscillatory sums ---------------------------------------------------------------

/// `max - min` of `∫_{t0}^t α` over the half-line (`∞` if it drifts).
fn antiderivative_oscillation(m: &EqModel, alpha: &TimeFunction) -> Q {
    let alpha = alpha.simplified();
    if let Some(c) = alpha.as_constant() {
        return Q::exact(if c == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let anti = TimeFunction::antiderivative(alpha.clone(), m.t0);
    match alpha.periodicity() {
        Periodicity::Periodic(p) => {
            let mean = alpha.integral(m.t0, m.t0 + p);
            let scale = alpha.integral(m.t0, m.t0 + p).abs().max(p * 1e-300);
            if mean.abs() > 1e-12 * scale.max(1.0) {
                return Q::new(f64::INFINITY, Soundness::ConservativeSound);
            }
            let w = Window::segment(m.t0, m.t0 + p);
            let hi = extreme(&anti, w, ExtremeKind::Sup, &m.scan);
            let lo = extreme(&anti, w, ExtremeKind::Inf, &m.scan);
            Q::new(
                hi.value - lo.value,
                Soundness::ConservativeSound.weakest(hi.soundness).weakest(lo.soundness),
            )
        }
        _ => {
            let hi = extreme(&anti, m.window(), ExtremeKind::Sup, &m.scan);
            let lo = extreme(&anti, m.window(), ExtremeKind::Inf, &m.scan);
            Q::new(hi.value - lo.value, Soundness::Heuristic)
        }
    }
}

pub(crate) fn oscillatory_sum(
    m: &EqModel,
    variant: OscSumVariant,
    split: Option<&(TimeFunction, TimeFunction)>,
) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if all.is_empty() {
        return not_applicable("the equation has no terms");
    }
    let a_lo = m.sum_lo(&all);
    let s_abs = m.sum_abs(&all);
    let a0 = m.sup(&s_abs);
    match variant {
        OscSumVariant::Th13 => {
            let forcing = TimeFunction::sum(
                all.iter()
                    .map(|&j| TimeFunction::scaled(m.tau(j).v * a0.v, m.terms[j].abs_env()))
                    .collect(),
            )
            .simplified();
            let beta = m.forced_response_sup(&a_lo, &forcing).weaken(a0.s);
            let main = decide(
                "sup ∫_{t0}^t e^{-∫_s^t A} A0 Σ τ_j |a_j(s)| ds",
                beta,
                Relation::Lt,
                Q::exact(1.0),
            );
            let mut b = Builder::new("TH13", Conclusion::Ues);
            b.check(main);
            for br in ode_branches(m, &a_lo, &[]) {
                b.branch(br);
            }
            Ok(b.finish())
        }
        OscSumVariant::Th14 => {
            let (tilde, alpha) = match split {
                Some((t, a)) => (t.clone(), a.clone()),
                None => {
                    if !m.is_point() {
                        return not_applicable("a split of the coefficient sum is required");
                    }
                    let a = a_lo.simplified();
                    match a.periodicity() {
                        Periodicity::Constant => (a.clone(), TimeFunction::zero()),
                        Periodicity::Periodic(p) => {
                            let mean = a.integral(m.t0, m.t0 + p) / p;
                            (
                                TimeFunction::constant(mean),
                                TimeFunction::sum(vec![a.clone(), TimeFunction::constant(-mean)])
                                    .simplified(),
                            )
                        }
                        Periodicity::Aperiodic => {
                            return not_applicable(
                                "aperiodic coefficient sum: a split (ã, α) must be supplied",
                            )
                        }
                    }
                }
            };
            let alpha0 = antiderivative_oscillation(m, &alpha);
            let mut b = Builder::new("TH14", Conclusion::Ues);
            b.check(decide("inf ã", m.inf(&tilde), Relation::Gt, zero()));
            let mut terms = Vec::new();
            for &j in &all {
                match m.ratio(&m.terms[j].abs_env(), &tilde) {
                    Some(r) => terms.push(m.tau(j) * r),
                    None => terms.push(Q::exact(f64::INFINITY)),
                }
            }
            let lhs = a0 * q_sum(terms);
            b.check(decide("A0 Σ τ_j ‖a_j/ã‖", lhs, Relation::Lt, alpha0.map(|x| (-x).exp())));
            b.note(format!("A0 = {:.6}, α0 = {:.6}", a0.v, alpha0.v));
            Ok(b.finish())
        }
    }
}

/// Oscillatory coefficient sums.
pub fn test_oscillatory_sum(
    eq: &LinearDDE,
    variant: OscSumVariant,
    split: Option<(TimeFunction, TimeFunction)>,
) -> Result<Verdict, CatalogError> {
    oscillatory_sum(&model(eq)?, variant, split.as_ref())
}

// ----- mixed signs -------------------------------------------------------------------

pub(crate) fn mixed(m: &EqModel, variant: MixedVariant) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if !m.descriptors_nonnegative(&all) {
        return not_applicable("a coefficient descriptor takes negative values");
    }
    let plus: Vec<usize> = all.iter().copied().filter(|&j| m.terms[j].sign == SignTag::Plus).collect();
    let minus: Vec<usize> =
        all.iter().copied().filter(|&j| m.terms[j].sign == SignTag::Minus).collect();
    if plus.is_empty() {
        return not_applicable("no positive term");
    }
    let id = match variant {
        MixedVariant::Th8 => "TH8",
        MixedVariant::Th10 => "TH10",
    };
    let mut b = Builder::new(id, Conclusion::Ues);
    match variant {
        MixedVariant::Th10 => {
            b.check(decide("inf (Σa_k - Σb_k)", m.inf(&m.sum_lo(&all)), Relation::Gt, zero()));
        }
        MixedVariant::Th8 => {
            if plus.len() != minus.len() {
                return not_applicable("positive and negative terms must pair up");
            }
            for (&p, &q) in plus.iter().zip(&minus) {
                let d = TimeFunction::sum(vec![m.terms[p].lag.clone(), neg(m.terms[q].lag.clone())])
                    .simplified();
                if m.inf(&d).v < 0.0 {
                    return not_applicable("a positive term has a smaller delay than its pair");
                }
            }
            b.check(decide(
                "liminf Σ(a_k - b_k)",
                m.liminf(&m.sum_lo(&all)),
                Relation::Gt,
                zero(),
            ));
            let h = plus
                .iter()
                .map(|&p| m.limsup(&m.terms[p].lag))
                .fold(Q::exact(0.0), Q::max);
            for &q in &minus {
                b.check(decide(
                    &format!("H limsup b_{}", q + 1),
                    h * m.limsup(m.terms[q].desc_hi()),
                    Relation::Lt,
                    Q::exact(1.0),
                ));
            }
        }
    }
    let pm = positive_part_model(m, &plus);
    for br in nonosc_branches(&pm, &pm.all(), Conclusion::Ues) {
        b.branch(br);
    }
    b.note("the equation of positive terms has a positive fundamental function");
    Ok(b.finish())
}

/// Positive and negative terms, positive part nonoscillatory.
pub fn test_mixed_signs(eq: &LinearDDE, variant: MixedVariant) -> Result<Verdict, CatalogError> {
    mixed(&model(eq)?, variant)
}

// ----- perturbations -------------------------------------------------------------------

/// Perturbation criteria. The base equation is first certified by the rest
/// of the catalog (its strongest sound exponential-stability verdict).
pub fn test_perturbation(
    base: &LinearDDE,
    pert: &LinearDDE,
    variant: PerturbationVariant,
) -> Result<Verdict, CatalogError> {
    let base_verdict = if variant == PerturbationVariant::Th19 {
        Verdict::not_applicable("none", "not needed".into())
    } else {
        super::run_all(base)
            .into_iter()
            .find(|v| {
                matches!(v.conclusion, Conclusion::Ues | Conclusion::Ges)
                    && v.soundness == super::VerdictSoundness::Sound
            })
            .ok_or_else(|| {
                CatalogError::NotApplicable(
                    "the base equation is not certified exponentially stable".into(),
                )
            })?
    };
    test_perturbation_given(base, &base_verdict, pert, variant)
}

/// Perturbation criteria with an externally supplied base verdict.
pub fn test_perturbation_given(
    base: &LinearDDE,
    base_verdict: &Verdict,
    pert: &LinearDDE,
    variant: PerturbationVariant,
) -> Result<Verdict, CatalogError> {
    let bm = model(base)?;
    let pm = model(pert)?;
    let id = match variant {
        PerturbationVariant::Cor3Limit => "COR3-LIMIT",
        PerturbationVariant::Th18 => "TH18",
        PerturbationVariant::Th19 => "TH19",
    };
    let base_ok = matches!(base_verdict.conclusion, Conclusion::Ues | Conclusion::Ges);
    if variant != PerturbationVariant::Th19 && !base_ok {
        return not_applicable("the base equation is not certified exponentially stable");
    }
    let mut b = Builder::new(id, Conclusion::Ues);
    match variant {
        PerturbationVariant::Cor3Limit => {
            let s = pm.sum_abs(&pm.all());
            let tol = Q::exact(1e-3);
            let vanish = |q: Q| if q.v == 0.0 { q } else { q.weaken(Soundness::Heuristic) };
            b.branch(Branch::new("window means vanish", Conclusion::Ues).with(decide(
                "limsup ∫_{t-1}^t Σ|b_j|",
                vanish(pm.win(&s, &TimeFunction::constant(1.0), ExtremeKind::Limsup)),
                Relation::Le,
                tol,
            )));
            b.branch(Branch::new("coefficients vanish", Conclusion::Ues).with(decide(
                "limsup Σ|b_j|",
                vanish(pm.limsup(&s)),
                Relation::Le,
                tol,
            )));
            let total = match s.periodicity() {
                Periodicity::Aperiodic => Q::new(
                    s.integral(pm.t0, pm.t0 + pm.scan.offset + pm.scan.width),
                    Soundness::Heuristic,
                ),
                _ => {
                    let sup = pm.sup(&s);
                    Q::new(if sup.v == 0.0 { 0.0 } else { f64::INFINITY }, sup.s)
                }
            };
            b.branch(Branch::new("integrable coefficients", Conclusion::Ues).with(decide(
                "∫_{t0}^∞ Σ|b_j|",
                total,
                Relation::Lt,
                Q::exact(f64::INFINITY),
            )));
            b.note(format!("base equation certified by {}", base_verdict.test_id));
        }
        PerturbationVariant::Th18 => {
            if !bm.is_point() || !pm.is_point() || bm.n() != pm.n() {
                return not_applicable("base and perturbed equations must have matching terms");
            }
            let all = bm.all();
            let a = bm.sum_lo(&all);
            let sb = pm.sum_abs(&all);
            b.check(decide("inf Σa", bm.inf(&a), Relation::Gt, zero()));
            let mu = TimeFunction::sum(
                all.iter()
                    .map(|&j| {
                        TimeFunction::sum(vec![
                            quot(
                                TimeFunction::abs(TimeFunction::sum(vec![
                                    bm.terms[j].lo(),
                                    neg(pm.terms[j].lo()),
                                ])),
                                &a,
                            ),
                            TimeFunction::product(vec![
                                quot(pm.terms[j].abs_env(), &a),
                                wi_gap(&sb, &bm.terms[j].lag, &pm.terms[j].lag),
                            ]),
                        ])
                    })
                    .collect(),
            )
            .simplified();
            b.check(decide(
                "sup Σ [|a_j - b_j|/A + (|b_j|/A) |∫_{h_j}^{g_j} Σ|b_k||]",
                bm.sup(&mu),
                Relation::Lt,
                Q::exact(1.0),
            ));
            b.note(format!("base equation certified by {}", base_verdict.test_id));
        }
        PerturbationVariant::Th19 => {
            if !bm.is_point() || !pm.is_point() || bm.n() != pm.n() {
                return not_applicable("base and perturbed equations must have matching terms");
            }
            let all = bm.all();
            if all.iter().any(|&j| bm.terms[j].lo() != pm.terms[j].lo()) {
                return not_applicable("only the delays may differ");
            }
            if !bm.nonnegative(&all).0 {
                return not_applicable("a coefficient takes negative values");
            }
            let a = bm.sum_lo(&all);
            b.check(decide("inf Σa", bm.inf(&a), Relation::Gt, zero()));
            let q = TimeFunction::sum(
                all.iter()
                    .map(|&j| {
                        TimeFunction::product(vec![
                            quot(bm.terms[j].lo(), &a),
                            wi_gap(&a, &bm.terms[j].lag, &pm.terms[j].lag),
                        ])
                    })
                    .collect(),
            )
            .simplified();
            b.check(decide(
                "limsup Σ (a_j/A) |∫_{h_j}^{g_j} A|",
                bm.limsup(&q),
                Relation::Lt,
                Q::exact(1.0),
            ));
            for br in nonosc_branches(&bm, &all, Conclusion::Ues) {
                b.branch(br);
            }
        }
    }
    Ok(b.finish())
}

// ----- two terms ---------------------------------------------------------------------

pub(crate) fn two_term(m: &EqModel, variant: TwoTermVariant) -> Result<Verdict, CatalogError> {
    if m.n() != 2 {
        return not_applicable("exactly two terms are required");
    }
    let id = match variant {
        TwoTermVariant::Th5 => "TH5",
        TwoTermVariant::Th7 => "TH7",
        TwoTermVariant::Th12_1 => "TH12-1",
        TwoTermVariant::Th12_2 => "TH12-2",
    };
    let all = m.all();
    let a_lo = m.sum_lo(&all);
    let a_hi = m.sum_hi(&all);
    let mut b = Builder::new(id, Conclusion::Ues);
    let mut any = false;
    for (i, k) in [(0usize, 1usize), (1, 0)] {
        let (ti, tk) = (&m.terms[i], &m.terms[k]);
        let label = format!("α = term {}, β = term {}", i + 1, k + 1);
        match variant {
            TwoTermVariant::Th5 => {
                any = true;
                let q = TimeFunction::product(vec![
                    quot(tk.abs_env(), &a_lo),
                    wi_gap(&a_hi, &ti.lag, &tk.lag),
                ])
                .simplified();
                b.branch(
                    Branch::new(label, Conclusion::Ues)
                        .with(decide("inf (α+β)", m.inf(&a_lo), Relation::Gt, zero()))
                        .with(decide(
                            "sup ∫_{h(t)}^t (α+β)",
                            m.win(&a_hi, &ti.lag, ExtremeKind::Sup),
                            Relation::Le,
                            Q::exact(1.0 / E),
                        ))
                        .with(decide(
                            "limsup |β|/(α+β) |∫_{h(t)}^{g(t)} (α+β)|",
                            m.limsup(&q),
                            Relation::Lt,
                            Q::exact(1.0),
                        )),
                );
            }
            TwoTermVariant::Th7 => {
                // α ≥ β ≥ 0 with β entering negatively and t ≥ g(t) ≥ h(t).
                let beta_ok = m.sup(&tk.hi()).v <= 0.0;
                let gap = TimeFunction::sum(vec![ti.lag.clone(), neg(tk.lag.clone())]).simplified();
                if !beta_ok || m.inf(&a_lo).v < 0.0 || m.inf(&gap).v < 0.0 {
                    continue;
                }
                any = true;
                let f = TimeFunction::sum(vec![ti.hi(), TimeFunction::scaled(1.0 / E, tk.hi())])
                    .simplified();
                let i_q = decide(
                    "limsup ∫_{h(t)}^t (α - β/e)",
                    m.win(&f, &ti.lag, ExtremeKind::Limsup),
                    Relation::Lt,
                    Q::exact(1.0 / E),
                );
                b.branch(
                    Branch::new(format!("{label}: exponential stability"), Conclusion::Ues)
                        .with(i_q.clone())
                        .with(decide("inf (α - β)", m.inf(&a_lo), Relation::Gt, zero())),
                );
                b.branch(Branch::new(format!("{label}: nonoscillation"), Conclusion::Nonoscillatory).with(i_q));
            }
            TwoTermVariant::Th12_1 | TwoTermVariant::Th12_2 => {
                if m.inf(&ti.lo()).v < 0.0 || m.sup(&tk.hi()).v > 0.0 {
                    continue;
                }
                any = true;
                let ratio = m
                    .ratio(&tk.abs_env(), &a_lo)
                    .unwrap_or(Q::new(f64::INFINITY, Soundness::Exact));
                let j = m.sup(&wi_gap(&a_hi, &ti.lag, &tk.lag));
                let i1 = m.win(&a_hi, &ti.lag, ExtremeKind::Limsup);
                let mut br = Branch::new(label, Conclusion::Ues)
                    .with(decide("inf (α - β)", m.inf(&a_lo), Relation::Gt, zero()));
                if variant == TwoTermVariant::Th12_1 {
                    br.push(decide("limsup ∫_{h(t)}^t (α - β)", i1, Relation::Le, Q::exact(1.0 / E)));
                    br.push(decide(
                        "‖β/(α-β)‖ sup |∫_{h(t)}^{g(t)} (α-β)|",
                        ratio * j,
                        Relation::Lt,
                        Q::exact(0.5),
                    ));
                } else {
                    br.push(decide("limsup ∫_{h(t)}^t (α - β)", i1, Relation::Gt, Q::exact(1.0 / E)));
                    br.push(decide(
                        "sup ∫_{h(t)}^t (α-β) + 2 ‖β/(α-β)‖ sup |∫_{h(t)}^{g(t)} (α-β)|",
                        m.win(&a_hi, &ti.lag, ExtremeKind::Sup) + ratio * j * 2.0,
                        Relation::Lt,
                        Q::exact(ONE_PLUS_INV_E),
                    ));
                }
                b.branch(br);
            }
        }
    }
    if !any {
        return not_applicable("no ordering of the two terms meets the sign requirements");
    }
    Ok(b.finish())
}

/// Two-term criteria `x' + α(t) x(h(t)) ± β(t) x(g(t)) = 0`.
pub fn test_two_term(eq: &LinearDDE, variant: TwoTermVariant) -> Result<Verdict, CatalogError> {
    two_term(&model(eq)?, variant)
}

// ----- non-delay term ---------------------------------------------------------------------

fn nondelay_parts(m: &EqModel) -> Result<(usize, Vec<usize>), CatalogError> {
    let inst = m.instantaneous();
    if inst.len() != 1 {
        return not_applicable("exactly one non-delay term is required");
    }
    Ok((inst[0], m.delayed()))
}

fn nondelay_checks(
    m: &EqModel,
    variant: NondelayVariant,
) -> Result<Vec<super::model::Decided>, CatalogError> {
    let (i, delayed) = nondelay_parts(m)?;
    let alpha = m.terms[i].lo();
    let sb = m.sum_abs(&delayed);
    let inf_a = m.inf(&alpha);
    Ok(match variant {
        NondelayVariant::Th15 => vec![
            decide("inf α", inf_a, Relation::Ge, zero()),
            decide(
                "sup ∫_{t0}^t e^{-∫_s^t α} Σ|a_k(s)| ds",
                m.forced_response_sup(&alpha, &sb),
                Relation::Lt,
                Q::exact(1.0),
            ),
        ],
        NondelayVariant::Cor6a => vec![
            decide("inf α", inf_a, Relation::Ge, zero()),
            decide(
                "inf (α - Σ|a_k|)",
                m.inf(&TimeFunction::sum(vec![alpha.clone(), neg(sb)]).simplified()),
                Relation::Ge,
                zero(),
            ),
        ],
        NondelayVariant::Cor6b => vec![
            decide("inf α", inf_a, Relation::Gt, zero()),
            decide(
                "sup Σ|a_k|/α",
                if delayed.is_empty() {
                    zero()
                } else {
                    m.ratio(&sb, &alpha).unwrap_or(Q::new(f64::INFINITY, Soundness::Exact))
                },
                Relation::Lt,
                Q::exact(1.0),
            ),
        ],
        NondelayVariant::Cor1aA => vec![
            decide("inf α", inf_a, Relation::Gt, zero()),
            decide(
                "Σ ‖a_k/α‖",
                q_sum(delayed.iter().map(|&k| {
                    m.ratio(&m.terms[k].abs_env(), &alpha)
                        .unwrap_or(Q::new(f64::INFINITY, Soundness::Exact))
                })),
                Relation::Lt,
                Q::exact(1.0),
            ),
        ],
    })
}

pub(crate) fn nondelay(m: &EqModel, variant: NondelayVariant) -> Result<Verdict, CatalogError> {
    let (id, conclusion) = match variant {
        NondelayVariant::Th15 => ("TH15", Conclusion::BoundedSolutions),
        NondelayVariant::Cor6a => ("COR6A", Conclusion::BoundedSolutions),
        NondelayVariant::Cor6b => ("COR6B", Conclusion::Ues),
        NondelayVariant::Cor1aA => ("COR1A-A", Conclusion::Ues),
    };
    let mut b = Builder::new(id, conclusion);
    for d in nondelay_checks(m, variant)? {
        b.check(d);
    }
    Ok(b.finish())
}

/// `x' + α(t) x + Σ a_k(t) x(h_k(t)) = 0` with a dominant non-delay term.
pub fn test_nondelay(eq: &LinearDDE, variant: NondelayVariant) -> Result<Verdict, CatalogError> {
    nondelay(&model(eq)?, variant)
}

pub(crate) fn shifted(m: &EqModel, lambda: Option<f64>) -> Result<Verdict, CatalogError> {
    let Some(eq) = m.as_linear() else {
        return Err(CatalogError::NotIntervalCapable("TH16".into()));
    };
    let (i, _) = nondelay_parts(m)?;
    let lambdas: Vec<f64> = match lambda {
        Some(l) => {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CatalogError::InvalidParameter(format!(
                    "the shift λ must be positive, got {l}"
                )));
            }
            vec![l]
        }
        None => {
            let inf_a = m.inf(&m.terms[i].lo()).v;
            if inf_a > 0.0 && inf_a.is_finite() {
                (1..8).map(|k| inf_a * k as f64 / 8.0).collect()
            } else {
                vec![0.05]
            }
        }
    };
    let mut b = Builder::new("TH16", Conclusion::Ues);
    for lam in lambdas {
        let shifted = exponential_shift(&eq, lam)
            .map_err(|e| CatalogError::NotApplicable(e.to_string()))?;
        let sm = EqModel::from_linear(&shifted)?;
        for (name, variant) in [("convolution", NondelayVariant::Th15), ("pointwise", NondelayVariant::Cor6a)] {
            let mut br = Branch::new(format!("λ = {lam:.6}, {name} bound"), Conclusion::Ues);
            for d in nondelay_checks(&sm, variant)? {
                br.push(d);
            }
            b.branch(br);
        }
    }
    b.note("bounded solutions of the shifted equation give exponential decay at rate λ");
    Ok(b.finish())
}

/// Bounded solutions of `y = e^{λt} x` imply exponential stability.
pub fn test_shifted_boundedness(eq: &LinearDDE, lambda: f64) -> Result<Verdict, CatalogError> {
    shifted(&model(eq)?, Some(lambda))
}
