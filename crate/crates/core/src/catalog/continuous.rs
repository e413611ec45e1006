//! Tests for equations with continuous coefficients: nonoscillation, the
//! 3/2-type criteria, dominant non-delay terms and the Φ-band criterion.

use super::model::{
    decide, forced_response_sup, not_applicable, q_sum, window_convolution_sup, Branch, Builder,
    EqModel, Q,
};
use super::verdict::{Conclusion, Relation, Verdict};
use super::CatalogError;
use crate::dde_model::LinearDDE;
use crate::funcmodel::{extreme, ExtremeKind, Periodicity, Soundness, TimeFunction, Window};
use crate::solver::compute_phi;
use std::collections::HashMap;
use std::f64::consts::{E, FRAC_PI_2};
use std::sync::{Mutex, OnceLock};

/// Variant of the dominant non-delay test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum DominantVariant {
    /// `a(t) ≥ |b(t)| S + e(t)` with `S = sup ∫_{h(t)}^t e`.
    I,
    /// `a(t) ≥ α |b(t)|` with `α > 1`.
    #[default]
    II,
    /// `a(t) ≥ |b(t)| + e(t)` with `∫_{h(t)}^t e` bounded.
    III,
}

/// Variant of the constant-feedback tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LizVariant {
    /// One constant non-delay term and one delayed term.
    Th21,
    /// One non-delay term and several delayed terms.
    Th22,
}

fn model(eq: &LinearDDE) -> Result<EqModel, CatalogError> {
    EqModel::from_linear(eq)
}

/// The unique non-delay term and the delayed ones, if the structure matches.
fn split_instantaneous(m: &EqModel) -> Option<(usize, Vec<usize>)> {
    let inst = m.instantaneous();
    if inst.len() != 1 {
        return None;
    }
    Some((inst[0], m.delayed()))
}

// ----- nonoscillation ----------------------------------------------------------

/// Positivity of the fundamental function of the sub-equation on `idx`
/// (nonnegative coefficients assumed): either the `1/e` integral bound or an
/// exponential witness `Σ sup a_j e^{λ τ_j} ≤ λ`.
pub(crate) fn nonosc_branches(m: &EqModel, idx: &[usize], conclusion: Conclusion) -> Vec<Branch> {
    let a_hi = m.sum_hi(idx);
    let lag = m.max_lag(idx);
    let w = m.win(&a_hi, &lag, ExtremeKind::Sup);
    let b1 = Branch::new("integral over the largest delay", conclusion).with(decide(
        "sup ∫_{t-max lag}^t Σa",
        w,
        Relation::Le,
        Q::exact(1.0 / E),
    ));
    let alphas: Vec<Q> = idx
        .iter()
        .map(|&j| m.sup(&m.terms[j].hi()).map(|v| v.max(0.0)))
        .collect();
    let taus: Vec<Q> = idx.iter().map(|&j| m.tau(j)).collect();
    let g = |lam: f64| -> f64 {
        alphas.iter().zip(&taus).map(|(a, t)| a.v * (lam * t.v).exp()).sum::<f64>() - lam
    };
    let min_tau = taus.iter().map(|t| t.v).filter(|&t| t > 0.0).fold(f64::INFINITY, f64::min);
    let alpha_sum: f64 = alphas.iter().map(|a| a.v).sum();
    let hi = if min_tau.is_finite() { 10.0 / min_tau } else { alpha_sum + 1.0 };
    let lam = golden_min(&g, 0.0, hi.max(1e-9));
    let lhs = q_sum(alphas.iter().zip(&taus).map(|(a, t)| *a * (*t * lam).map(f64::exp)));
    let b2 = Branch::new(format!("exponential witness λ = {lam:.6}"), conclusion).with(decide(
        "Σ sup a_j e^{λ τ_j}",
        lhs,
        Relation::Le,
        Q::exact(lam),
    ));
    vec![b1, b2]
}

/// Minimiser of a unimodal function on `[lo, hi]` by golden-section search.
fn golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if !(fc.is_finite()) || fc > fd {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        }
        if (b - a) <= 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    if x > 0.0 {
        x
    } else {
        hi * 1e-12
    }
}

pub(crate) fn nonosc(m: &EqModel, id: &str) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if !m.nonnegative(&all).0 {
        return not_applicable("a coefficient takes negative values");
    }
    let mut b = Builder::new(id, Conclusion::Nonoscillatory);
    for br in nonosc_branches(m, &all, Conclusion::Nonoscillatory) {
        b.branch(br);
    }
    b.note("the fundamental function is positive");
    Ok(b.finish())
}

/// Positivity of the fundamental function (nonoscillation) for
/// nonnegative coefficients.
pub fn nonoscillation_check(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    nonosc(&model(eq)?, "LEM34")
}

// ----- 3/2 criteria ------------------------------------------------------------

pub(crate) fn one_delay_32(m: &EqModel) -> Result<Verdict, CatalogError> {
    if m.n() != 1 {
        return not_applicable("exactly one term is required");
    }
    if !m.nonnegative(&[0]).0 {
        return not_applicable("the coefficient takes negative values");
    }
    let t = &m.terms[0];
    let mut b = Builder::new("TH20A", Conclusion::As);
    b.check(decide(
        "liminf ∫_{h(t)}^t a",
        m.win(&t.lo(), &t.lag, ExtremeKind::Liminf),
        Relation::Gt,
        Q::exact(0.0),
    ));
    b.check(decide(
        "limsup ∫_{h(t)}^t a",
        m.win(&t.hi(), &t.lag, ExtremeKind::Limsup),
        Relation::Lt,
        Q::exact(1.5),
    ));
    Ok(b.finish())
}

/// One delayed term with `0 < liminf ∫ a ≤ limsup ∫ a < 3/2`.
pub fn test_one_delay_32(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    one_delay_32(&model(eq)?)
}

pub(crate) fn krisztin(m: &EqModel) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if !m.nonnegative(&all).0 {
        return not_applicable("a coefficient takes negative values");
    }
    let s = q_sum(all.iter().map(|&j| m.sup(&m.terms[j].hi()) * m.tau(j)));
    let div = m.divergence_check("Σa", &m.sum_lo(&all));
    let mut b = Builder::new("TH20", Conclusion::As);
    let general = Branch::new("general coefficients", Conclusion::As)
        .with(decide("Σ sup a_j τ_j", s, Relation::Lt, Q::exact(1.0)))
        .with(div.clone());
    let general_ok = general.satisfied();
    b.branch(general);
    let constant = m.is_point() && m.terms.iter().all(|t| t.c_lo.as_constant().is_some());
    if !general_ok && constant {
        b.branch(
            Branch::new("constant coefficients", Conclusion::As)
                .with(decide("Σ a_j τ_j", s, Relation::Lt, Q::exact(1.5)))
                .with(div),
        );
    }
    Ok(b.finish())
}

/// Several delays: `Σ sup a_j τ_j < 1` (or `< 3/2` for constant
/// coefficients) together with divergence of `∫ Σ a_j`.
pub fn test_krisztin(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    krisztin(&model(eq)?)
}

pub(crate) fn sum_32(m: &EqModel) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if !m.nonnegative(&all).0 {
        return not_applicable("a coefficient takes negative values");
    }
    // A term whose delay dominates every other delay pointwise.
    let largest = all.iter().copied().find(|&k| {
        all.iter().all(|&j| {
            j == k || {
                let d = TimeFunction::sum(vec![
                    m.terms[k].lag.clone(),
                    TimeFunction::scaled(-1.0, m.terms[j].lag.clone()),
                ])
                .simplified();
                m.inf(&d).v >= 0.0
            }
        })
    });
    let Some(k) = largest else {
        return not_applicable("no delay dominates all others pointwise");
    };
    let a_hi = m.sum_hi(&all);
    let i = decide(
        "limsup ∫_{h_1(t)}^t Σa",
        m.win(&a_hi, &m.terms[k].lag, ExtremeKind::Limsup),
        Relation::Lt,
        Q::exact(1.5),
    );
    let mut b = Builder::new("TH20B", Conclusion::As);
    b.branch(
        Branch::new("divergent coefficient integral", Conclusion::As)
            .with(i.clone())
            .with(m.divergence_check("Σa", &m.sum_lo(&all))),
    );
    b.branch(Branch::new("bounded solutions", Conclusion::BoundedSolutions).with(i));
    b.note("when ∫ Σa converges, every solution tends to a constant");
    Ok(b.finish())
}

/// Ordered delays: `limsup ∫_{h_1(t)}^t Σ a_k < 3/2`.
pub fn test_sum_32(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    sum_32(&model(eq)?)
}

// ----- dominant non-delay term ------------------------------------------------

pub(crate) fn nondelay_dominant(
    m: &EqModel,
    variant: DominantVariant,
    e_aux: Option<&TimeFunction>,
) -> Result<Verdict, CatalogError> {
    let Some((i, delayed)) = split_instantaneous(m) else {
        return not_applicable("exactly one non-delay term is required");
    };
    if delayed.len() != 1 {
        return not_applicable("exactly one delayed term is required");
    }
    let d = delayed[0];
    let a_lo = m.terms[i].lo();
    let b_abs = m.terms[d].abs_env();
    let lag = m.terms[d].lag.clone();
    let mut b = Builder::new("TH21A", Conclusion::As);
    b.check(decide("inf a", m.inf(&a_lo), Relation::Gt, Q::exact(0.0)));
    match variant {
        DominantVariant::II => {
            let r = m.ratio(&b_abs, &a_lo).unwrap_or(Q::new(f64::INFINITY, Soundness::Exact));
            b.check(decide("sup |b|/a", r, Relation::Lt, Q::exact(1.0)));
            b.note("variant II: a(t) ≥ α|b(t)| with α > 1");
        }
        DominantVariant::I | DominantVariant::III => {
            let Some(e) = e_aux else {
                return Err(CatalogError::InvalidParameter(
                    "variants I and III need an auxiliary function e(t)".into(),
                ));
            };
            b.check(decide("inf e", m.inf(e), Relation::Ge, Q::exact(0.0)));
            let s = m.win(e, &lag, ExtremeKind::Sup);
            let slack_fn = if variant == DominantVariant::I {
                TimeFunction::sum(vec![
                    a_lo.clone(),
                    TimeFunction::scaled(-s.v, b_abs.clone()),
                    TimeFunction::scaled(-1.0, e.clone()),
                ])
            } else {
                TimeFunction::sum(vec![
                    a_lo.clone(),
                    TimeFunction::scaled(-1.0, b_abs.clone()),
                    TimeFunction::scaled(-1.0, e.clone()),
                ])
            };
            let name = if variant == DominantVariant::I {
                "inf (a - S|b| - e)"
            } else {
                "inf (a - |b| - e)"
            };
            b.check(decide(name, m.inf(&slack_fn.simplified()).weaken(s.s), Relation::Ge, Q::exact(0.0)));
            b.check(decide("S = sup ∫_{h(t)}^t e", s, Relation::Lt, Q::exact(f64::INFINITY)));
            b.check(m.divergence_check("e", e));
            b.note(if variant == DominantVariant::I {
                "variant I: a(t) ≥ |b(t)| S + e(t)"
            } else {
                "variant III: a(t) ≥ |b(t)| + e(t)"
            });
        }
    }
    Ok(b.finish())
}

/// `x' + a(t) x + b(t) x(h(t)) = 0` with a non-delay term dominating `|b|`.
pub fn test_nondelay_dominant(
    eq: &LinearDDE,
    variant: DominantVariant,
    e_aux: Option<&TimeFunction>,
) -> Result<Verdict, CatalogError> {
    nondelay_dominant(&model(eq)?, variant, e_aux)
}

/// `(α/b) e^{-α h} > ln((b² + αb)/(b² + α²))`, read as `+∞ > -∞` when `b = 0`.
fn liz_inequality(alpha: Q, b: Q, h: Q) -> (Q, Q) {
    if b.v <= 0.0 {
        return (
            Q::new(f64::INFINITY, alpha.s.weakest(b.s)),
            Q::new(f64::NEG_INFINITY, b.s),
        );
    }
    let lhs = (alpha / b) * (alpha * h).map(|x| (-x).exp());
    let rhs = ((b * b + alpha * b) / (b * b + alpha * alpha)).map(f64::ln);
    (lhs, rhs)
}

pub(crate) fn liz(m: &EqModel, variant: LizVariant) -> Result<Verdict, CatalogError> {
    let Some((i, delayed)) = split_instantaneous(m) else {
        return not_applicable("exactly one non-delay term is required");
    };
    if delayed.is_empty() {
        return not_applicable("at least one delayed term is required");
    }
    if !m.nonnegative(&delayed).0 {
        return not_applicable("a delayed coefficient takes negative values");
    }
    match variant {
        LizVariant::Th21 => {
            if delayed.len() != 1 {
                return not_applicable("exactly one delayed term is required");
            }
            let d = delayed[0];
            let Some(alpha) = m.terms[i].lo().as_constant().filter(|_| m.terms[i].is_point()) else {
                return not_applicable("the non-delay coefficient is not constant");
            };
            let bq = m.sup(&m.terms[d].hi());
            let h = m.tau(d);
            let (lhs, rhs) = liz_inequality(Q::exact(alpha), bq, h);
            let mut b = Builder::new("TH21", Conclusion::As);
            b.check(decide("α", Q::exact(alpha), Relation::Gt, Q::exact(0.0)));
            b.check(decide("(α/b) e^{-α h}", lhs, Relation::Gt, rhs));
            Ok(b.finish())
        }
        LizVariant::Th22 => {
            if !m.nonnegative(&[i]).0 {
                return not_applicable("the non-delay coefficient takes negative values");
            }
            let a_lo = m.terms[i].lo();
            let a_hi = m.terms[i].hi();
            let bsum = m.sum_hi(&delayed);
            let beta = m.ratio(&bsum, &a_lo).unwrap_or(Q::new(f64::INFINITY, Soundness::Exact));
            let h0 = m.win(&a_hi, &m.max_lag(&delayed), ExtremeKind::Limsup);
            let (lhs, rhs) = if beta.v <= 0.0 {
                (Q::new(f64::INFINITY, beta.s), Q::new(f64::NEG_INFINITY, beta.s))
            } else {
                (
                    Q::exact(1.0) / beta * h0.map(|x| (-x).exp()),
                    ((beta * beta + beta) / (beta * beta + 1.0)).map(f64::ln),
                )
            };
            let mut b = Builder::new("TH22", Conclusion::As);
            b.check(decide("inf α", m.inf(&a_lo), Relation::Gt, Q::exact(0.0)));
            b.check(decide("(1/β) e^{-h0}", lhs, Relation::Gt, rhs));
            b.note(format!(
                "β = {:.6}, h0 = {:.6}; right side ln((β²+β)/(β²+1)) = {:.6}",
                beta.v, h0.v, rhs.v
            ));
            Ok(b.finish())
        }
    }
}

/// Constant-feedback criteria for a non-delay term plus delayed terms.
pub fn test_liz_family(eq: &LinearDDE, variant: LizVariant) -> Result<Verdict, CatalogError> {
    liz(&model(eq)?, variant)
}

/// Certified lower bound on `inf_t ∫_{t0}^t a`.
fn integral_lower_bound(m: &EqModel, a: &TimeFunction) -> Q {
    let inf = m.inf(a);
    if inf.v >= 0.0 {
        return Q::new(0.0, inf.s);
    }
    let anti = TimeFunction::antiderivative(a.clone(), m.t0);
    if let Periodicity::Periodic(p) = a.periodicity() {
        let mean = a.integral(m.t0, m.t0 + p);
        if mean >= 0.0 {
            let r = extreme(&anti, Window::segment(m.t0, m.t0 + p), ExtremeKind::Inf, &m.scan);
            return Q::new(r.value.min(0.0), Soundness::ConservativeSound.weakest(r.soundness));
        }
        return Q::exact(f64::NEG_INFINITY);
    }
    let r = extreme(&anti, m.window(), ExtremeKind::Inf, &m.scan);
    Q::new(r.value.min(0.0), Soundness::Heuristic)
}

pub(crate) fn zhang(m: &EqModel) -> Result<Verdict, CatalogError> {
    let Some((i, delayed)) = split_instantaneous(m) else {
        return not_applicable("exactly one non-delay term is required");
    };
    if delayed.len() != 1 {
        return not_applicable("exactly one delayed term is required");
    }
    let d = delayed[0];
    if !m.nonnegative(&[d]).0 {
        return not_applicable("the delayed coefficient takes negative values");
    }
    let a_lo = m.terms[i].lo();
    let k = forced_response_sup(&a_lo, &m.terms[d].hi(), m.t0, &m.scan);
    let low = integral_lower_bound(m, &a_lo);
    let mut b = Builder::new("TH24A", Conclusion::As);
    b.check(decide("inf_t ∫_{t0}^t a", low, Relation::Gt, Q::exact(f64::NEG_INFINITY)));
    b.check(decide("sup_t ∫_{t0}^t e^{-∫_s^t a} b(s) ds", k, Relation::Lt, Q::exact(1.0)));
    b.check(m.divergence_check("a", &a_lo));
    Ok(b.finish())
}

/// Non-delay term with a convolution bound below 1.
pub fn test_zhang(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    zhang(&model(eq)?)
}

pub(crate) fn three_term(m: &EqModel) -> Result<Verdict, CatalogError> {
    if m.n() == 0 || m.n() > 3 {
        return not_applicable("one to three terms are required");
    }
    let all = m.all();
    let mut b = Builder::new("TH23", Conclusion::As);
    let mut any = false;
    for &i in &all {
        let a_lo = m.terms[i].lo();
        let inf_a = m.inf(&a_lo);
        if !(inf_a.v > 0.0) {
            continue;
        }
        any = true;
        let others: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
        let rest = m.sum_abs(&others);
        let r = if others.is_empty() {
            Q::exact(0.0)
        } else {
            m.ratio(&rest, &a_lo).unwrap_or(Q::new(f64::INFINITY, Soundness::Exact))
        };
        let total = TimeFunction::sum(vec![m.terms[i].hi(), rest]).simplified();
        let l = m.win(&total, &m.terms[i].lag, ExtremeKind::Limsup);
        // θ on a 1e-3 grid maximising the smaller of the two slacks.
        let mut theta = ((r.v + 1.0 - l.v) / 2.0).clamp(1e-3, 0.999);
        let mut best = f64::NEG_INFINITY;
        for k in 1..1000 {
            let th = k as f64 * 1e-3;
            let s = (th - r.v).min(1.0 - l.v - th);
            if s > best {
                best = s;
                theta = th;
            }
        }
        b.branch(
            Branch::new(format!("dominant term {} (θ = {theta:.3})", i + 1), Conclusion::As)
                .with(decide("sup (|b|+|c|)/a", r, Relation::Lt, Q::exact(theta)))
                .with(decide(
                    "limsup ∫_{h_1(t)}^t (a+|b|+|c|)",
                    l,
                    Relation::Lt,
                    Q::exact(1.0 - theta),
                ))
                .with(m.divergence_check("a", &a_lo)),
        );
    }
    if !any {
        return not_applicable("no term has a coefficient separated from zero");
    }
    Ok(b.finish())
}

/// One dominant delayed term with up to two perturbing terms.
pub fn test_three_term(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    three_term(&model(eq)?)
}

// ----- Φ band --------------------------------------------------------------------

fn phi_cached(x: f64) -> Option<f64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Option<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("phi cache").get(&x.to_bits()) {
        return *v;
    }
    let v = compute_phi(x).ok();
    cache.lock().expect("phi cache").insert(x.to_bits(), v);
    v
}

pub(crate) fn phi_band(m: &EqModel) -> Result<Verdict, CatalogError> {
    let all = m.all();
    if all.is_empty() || !m.is_point() {
        return not_applicable("point coefficients are required");
    }
    let mut coefs = Vec::with_capacity(all.len());
    for t in &m.terms {
        match t.lo().as_constant() {
            Some(v) if v > 0.0 => coefs.push(v),
            _ => return not_applicable("all coefficients must be positive constants"),
        }
    }
    let a: f64 = coefs.iter().sum();
    let l = q_sum(all.iter().map(|&j| m.liminf(&m.terms[j].lag) * coefs[j]));
    let u = q_sum(all.iter().map(|&j| m.limsup(&m.terms[j].lag) * coefs[j]));
    let centre = 0.5 * (l.v + u.v);
    let kmax = (FRAC_PI_2 / a / 0.01).ceil() as usize;
    let mut cands: Vec<f64> = (0..=kmax)
        .map(|k| k as f64 * 0.01)
        .filter(|&tau| tau * a < FRAC_PI_2)
        .collect();
    cands.sort_by(|x, y| (x * a - centre).abs().total_cmp(&(y * a - centre).abs()));
    let mut b = Builder::new("TH23A", Conclusion::As);
    let mut fallback: Option<Branch> = None;
    let mut evaluated = 0;
    for tau in cands {
        let x = tau * a;
        // Φ ≥ 1, so the band is never wider than [x - 1, x + 1].
        if !(x - 1.0 < l.v && u.v < x + 1.0) {
            continue;
        }
        let Some(phi) = phi_cached(x) else { continue };
        evaluated += 1;
        let w = Q::new(1.0 / phi, Soundness::ConservativeSound);
        let br = Branch::new(format!("τ = {tau:.2}"), Conclusion::As)
            .with(decide("τa - 1/Φ(τa)", Q::exact(x) - w, Relation::Lt, l))
            .with(decide("limsup Σ a_j (t - h_j(t))", u, Relation::Lt, Q::exact(x) + w));
        if br.satisfied() {
            b.branch(br);
            b.note(format!("Φ(τa) = {phi:.6} at τ = {tau:.2}"));
            return Ok(b.finish());
        }
        if fallback.is_none() {
            fallback = Some(br);
        }
        if evaluated >= 60 {
            break;
        }
    }
    match fallback {
        Some(br) => {
            b.branch(br);
        }
        None => {
            b.check(decide(
                "limsup Σ a_j (t - h_j(t)) - liminf Σ a_j (t - h_j(t))",
                u - l,
                Relation::Lt,
                Q::exact(2.0),
            ));
            b.check(decide("τ a within the admissible range", Q::exact(0.0), Relation::Gt, Q::exact(0.0)));
        }
    }
    b.note("no grid delay τ places the delay band inside (τa - 1/Φ, τa + 1/Φ)");
    Ok(b.finish())
}

/// Constant coefficients: searches a delay `τ` with
/// `τa - 1/Φ(τa) < liminf Σ a_j(t - h_j) ≤ limsup Σ a_j(t - h_j) < τa + 1/Φ(τa)`.
pub fn compute_and_test_phi_band(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    phi_band(&model(eq)?)
}

pub(crate) fn tang_zou(m: &EqModel) -> Result<Verdict, CatalogError> {
    let Some((i, delayed)) = split_instantaneous(m) else {
        return not_applicable("exactly one non-delay term is required");
    };
    if delayed.len() != 1 {
        return not_applicable("exactly one delayed term is required");
    }
    let d = delayed[0];
    let Some(a) = m.terms[i].lo().as_constant().filter(|_| m.terms[i].is_point()) else {
        return not_applicable("the non-delay coefficient is not constant");
    };
    if !(a > 0.0) {
        return not_applicable("the non-delay coefficient is not positive");
    }
    let Some(tau) = m.terms[d].lag.as_constant() else {
        return not_applicable("the delay is not constant");
    };
    // The delayed coefficient enters as -b(t) with b ≥ 0.
    let b_hi = TimeFunction::scaled(-1.0, m.terms[d].lo()).simplified();
    let b_lo = TimeFunction::scaled(-1.0, m.terms[d].hi()).simplified();
    if m.inf(&b_lo).v < 0.0 {
        return not_applicable("the delayed term is not negative feedback");
    }
    let beta = m.sup(&b_hi);
    let conv = window_convolution_sup(a, &b_hi, tau, m.t0, &m.scan);
    let rhs = if beta.v > 0.0 {
        Q::exact(1.0) + (Q::exact(1.0) + Q::exact(a * a) / (beta * beta)) * (0.5 * (-a * tau).exp())
    } else {
        Q::exact(f64::INFINITY)
    };
    let mut b = Builder::new("TH23C", Conclusion::As);
    b.check(decide("sup ∫_{t-τ}^t e^{-a(t-s)} b(s) ds", conv, Relation::Lt, rhs));
    b.note("the zero solution is uniformly asymptotically stable");
    Ok(b.finish())
}

/// Constant non-delay term and a negative-feedback delayed term.
pub fn test_tang_zou(eq: &LinearDDE) -> Result<Verdict, CatalogError> {
    tang_zou(&model(eq)?)
}
