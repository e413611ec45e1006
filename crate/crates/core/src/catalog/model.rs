//! Internal equation model shared by point and interval (linearised)
//! equations, soundness-tracking quantities and the verdict builder.

use super::verdict::{Alternative, Conclusion, HypothesisCheck, Relation, Verdict};
use super::CatalogError;
use crate::dde_model::{validate_linear, LinearDDE, SignTag};
use crate::funcmodel::{
    extreme, ratio_sup, window_integral_extreme, ExtremeKind, Periodicity, ScanConfig, Soundness,
    TimeFunction, Window,
};
use std::ops::{Add, Div, Mul, Sub};

/// A numeric quantity together with the trust level of the bound it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Q {
    pub v: f64,
    pub s: Soundness,
}

impl Q {
    pub fn exact(v: f64) -> Q {
        Q { v, s: Soundness::Exact }
    }

    pub fn new(v: f64, s: Soundness) -> Q {
        Q { v, s }
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Q {
        Q { v: f(self.v), s: self.s }
    }

    pub fn max(self, o: Q) -> Q {
        Q { v: self.v.max(o.v), s: self.s.weakest(o.s) }
    }

    pub fn weaken(self, s: Soundness) -> Q {
        Q { v: self.v, s: self.s.weakest(s) }
    }
}

macro_rules! q_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                Q { v: self.v $op o.v, s: self.s.weakest(o.s) }
            }
        }
        impl $tr<f64> for Q {
            type Output = Q;
            fn $m(self, o: f64) -> Q {
                Q { v: self.v $op o, s: self.s }
            }
        }
    };
}
q_op!(Add, add, +);
q_op!(Sub, sub, -);
q_op!(Mul, mul, *);
q_op!(Div, div, /);

/// Sum of quantities (exact zero when empty).
pub(crate) fn q_sum(it: impl IntoIterator<Item = Q>) -> Q {
    it.into_iter().fold(Q::exact(0.0), |a, b| a + b)
}

/// One term `± c_j(t) x(t - lag_j(t))` whose unsigned descriptor is only
/// known to lie in `[c_lo(t), c_hi(t)]`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct ModelTerm {
    pub sign: SignTag,
    pub c_lo: TimeFunction,
    pub c_hi: TimeFunction,
    pub lag: TimeFunction,
    pub lag_bound: f64,
    pub instantaneous: bool,
}

impl ModelTerm {
    pub fn is_point(&self) -> bool {
        self.c_lo == self.c_hi
    }

    /// Lower envelope of the signed coefficient `a_j`.
    pub fn lo(&self) -> TimeFunction {
        match self.sign {
            SignTag::Plus => self.c_lo.clone(),
            SignTag::Minus => TimeFunction::scaled(-1.0, self.c_hi.clone()).simplified(),
        }
    }

    /// Upper envelope of the signed coefficient `a_j`.
    pub fn hi(&self) -> TimeFunction {
        match self.sign {
            SignTag::Plus => self.c_hi.clone(),
            SignTag::Minus => TimeFunction::scaled(-1.0, self.c_lo.clone()).simplified(),
        }
    }

    /// Upper envelope of `|a_j|`.
    pub fn abs_env(&self) -> TimeFunction {
        if self.is_point() {
            TimeFunction::abs(self.c_lo.clone()).simplified()
        } else {
            TimeFunction::max_of(vec![
                TimeFunction::abs(self.c_lo.clone()),
                TimeFunction::abs(self.c_hi.clone()),
            ])
            .simplified()
        }
    }

    /// Upper envelope of the unsigned descriptor.
    pub fn desc_hi(&self) -> &TimeFunction {
        &self.c_hi
    }
}

/// Equation `x' + Σ a_j(t) x(t - lag_j(t)) = 0` with enclosed coefficients.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct EqModel {
    pub t0: f64,
    pub terms: Vec<ModelTerm>,
    pub scan: ScanConfig,
}

impl EqModel {
    pub fn from_linear(eq: &LinearDDE) -> Result<EqModel, CatalogError> {
        let report = validate_linear(eq);
        if !report.is_valid() {
            let msg = report
                .issues
                .iter()
                .map(|i| i.message.clone())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(CatalogError::NotApplicable(format!("invalid equation: {msg}")));
        }
        Ok(EqModel {
            t0: eq.t0,
            scan: eq.scan_config(),
            terms: eq
                .terms
                .iter()
                .map(|t| {
                    let c = t.coef.simplified();
                    ModelTerm {
                        sign: t.sign,
                        c_lo: c.clone(),
                        c_hi: c,
                        lag: t.delay.lag.simplified(),
                        lag_bound: t.delay.lag_bound,
                        instantaneous: t.delay.is_zero(),
                    }
                })
                .collect(),
        })
    }

    /// Model of an interval equation; terms carry signed envelopes with a
    /// `Plus` tag.
    pub fn from_terms(t0: f64, terms: Vec<ModelTerm>) -> EqModel {
        let tau_max = terms.iter().map(|t| t.lag_bound).fold(0.0, f64::max);
        EqModel { t0, scan: ScanConfig::for_lag_bound(tau_max), terms }
    }

    /// Replaces the default scan window with the one in `opts`, if any.
    pub(crate) fn apply_scan(&mut self, opts: &super::RunOptions) {
        if let Some(scan) = &opts.scan {
            self.scan = scan.clone();
        }
    }

    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn is_point(&self) -> bool {
        self.terms.iter().all(ModelTerm::is_point)
    }

    /// The point equation, when every enclosure is degenerate.
    pub fn as_linear(&self) -> Option<LinearDDE> {
        if !self.is_point() {
            return None;
        }
        Some(LinearDDE::new(
            self.t0,
            self.terms
                .iter()
                .map(|t| {
                    crate::dde_model::LinearTerm::new(
                        t.c_lo.clone(),
                        crate::dde_model::DelaySpec::with_bound(t.lag.clone(), t.lag_bound),
                        t.sign,
                    )
                })
                .collect(),
        ))
    }

    pub fn window(&self) -> Window {
        Window::halfline(self.t0)
    }

    pub fn all(&self) -> Vec<usize> {
        (0..self.n()).collect()
    }

    pub fn delayed(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| !self.terms[j].instantaneous).collect()
    }

    pub fn instantaneous(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.terms[j].instantaneous).collect()
    }

    // ----- functions built from the enclosures -------------------------------

    pub fn sum_lo(&self, idx: &[usize]) -> TimeFunction {
        TimeFunction::sum(idx.iter().map(|&j| self.terms[j].lo()).collect()).simplified()
    }

    pub fn sum_hi(&self, idx: &[usize]) -> TimeFunction {
        TimeFunction::sum(idx.iter().map(|&j| self.terms[j].hi()).collect()).simplified()
    }

    pub fn sum_abs(&self, idx: &[usize]) -> TimeFunction {
        TimeFunction::sum(idx.iter().map(|&j| self.terms[j].abs_env()).collect()).simplified()
    }

    /// Largest lag among `idx` as a function (the smallest delayed argument).
    pub fn max_lag(&self, idx: &[usize]) -> TimeFunction {
        let lags: Vec<TimeFunction> = idx.iter().map(|&j| self.terms[j].lag.clone()).collect();
        if lags.len() == 1 {
            lags[0].clone()
        } else {
            TimeFunction::max_of(lags).simplified()
        }
    }

    // ----- bound queries ------------------------------------------------------

    pub fn ext(&self, f: &TimeFunction, kind: ExtremeKind) -> Q {
        let r = extreme(f, self.window(), kind, &self.scan);
        Q::new(r.value, r.soundness)
    }

    pub fn sup(&self, f: &TimeFunction) -> Q {
        self.ext(f, ExtremeKind::Sup)
    }

    pub fn inf(&self, f: &TimeFunction) -> Q {
        self.ext(f, ExtremeKind::Inf)
    }

    pub fn limsup(&self, f: &TimeFunction) -> Q {
        self.ext(f, ExtremeKind::Limsup)
    }

    pub fn liminf(&self, f: &TimeFunction) -> Q {
        self.ext(f, ExtremeKind::Liminf)
    }

    /// Extreme of `∫_{t - lag(t)}^t f`.
    pub fn win(&self, f: &TimeFunction, lag: &TimeFunction, kind: ExtremeKind) -> Q {
        match window_integral_extreme(f, lag, kind, self.t0, &self.scan) {
            Ok(r) => Q::new(r.value, r.soundness),
            Err(_) => Q::new(
                if kind.is_upper() { f64::INFINITY } else { f64::NEG_INFINITY },
                Soundness::ConservativeSound,
            ),
        }
    }

    /// Upper bound on `sup |f/g|`; `None` when `g` is not separated from zero.
    pub fn ratio(&self, f: &TimeFunction, g: &TimeFunction) -> Option<Q> {
        ratio_sup(f, g, self.window(), &self.scan)
            .ok()
            .map(|r| Q::new(r.value, r.soundness))
    }

    /// `‖a_j‖`.
    pub fn norm(&self, j: usize) -> Q {
        self.sup(&self.terms[j].abs_env())
    }

    /// `‖Σ_{idx} a_j‖` (worst case over the enclosures).
    pub fn norm_sum(&self, idx: &[usize]) -> Q {
        if idx.iter().all(|&j| self.terms[j].is_point()) {
            self.sup(&TimeFunction::abs(self.sum_lo(idx)))
        } else {
            let hi = self.sup(&self.sum_hi(idx));
            let lo = self.inf(&self.sum_lo(idx));
            hi.max(lo.map(|v| -v)).map(|v| v.max(0.0))
        }
    }

    /// Declared delay bound `τ_j`.
    pub fn tau(&self, j: usize) -> Q {
        let t = &self.terms[j];
        if t.instantaneous {
            Q::exact(0.0)
        } else if t.lag.as_constant().is_some() {
            Q::exact(t.lag_bound)
        } else {
            Q::new(t.lag_bound, Soundness::ConservativeSound)
        }
    }

    pub fn tau_max(&self) -> f64 {
        self.terms.iter().map(|t| t.lag_bound).fold(0.0, f64::max)
    }

    /// `‖a_j / A_Ω‖`, worst case over the enclosures; `None` when `A_Ω` is
    /// not separated from zero.
    pub fn omega_ratio(&self, j: usize, omega: &[usize]) -> Option<Q> {
        let all_point = omega.iter().chain(std::iter::once(&j)).all(|&i| self.terms[i].is_point());
        let a_omega_lo = self.sum_lo(omega);
        if all_point {
            return self.ratio(&self.terms[j].lo(), &a_omega_lo);
        }
        if !omega.contains(&j) {
            return self.ratio(&self.terms[j].abs_env(), &a_omega_lo);
        }
        // |c| / (c + R) is monotone in c on each side of zero and decreasing
        // in R, so the worst case is at R = R_lo and an endpoint of c.
        let sep = self.inf(&a_omega_lo);
        if !(sep.v > 0.0) {
            return None;
        }
        let rest: Vec<usize> = omega.iter().copied().filter(|&i| i != j).collect();
        let r_lo = self.sum_lo(&rest);
        let end = |c: TimeFunction| {
            TimeFunction::quotient(
                TimeFunction::abs(c.clone()),
                TimeFunction::sum(vec![c, r_lo.clone()]),
            )
        };
        let f = TimeFunction::max_of(vec![end(self.terms[j].lo()), end(self.terms[j].hi())]);
        Some(self.sup(&f).weaken(sep.s))
    }

    /// Whether every signed coefficient is nonnegative (sound lower bound).
    pub fn nonnegative(&self, idx: &[usize]) -> (bool, Soundness) {
        let mut s = Soundness::Exact;
        for &j in idx {
            let lo = self.terms[j].lo();
            if lo.is_nonnegative_structurally() {
                continue;
            }
            let q = self.inf(&lo);
            s = s.weakest(q.s);
            if q.v < 0.0 {
                return (false, s);
            }
        }
        (true, s)
    }

    /// Whether every unsigned descriptor is nonnegative.
    pub fn descriptors_nonnegative(&self, idx: &[usize]) -> bool {
        idx.iter().all(|&j| {
            let lo = &self.terms[j].c_lo;
            lo.is_nonnegative_structurally() || self.inf(lo).v >= 0.0
        })
    }

    /// Divergence `∫^∞ f = ∞` certified by `inf f > 0` or a positive
    /// period mean.
    pub fn divergence_check(&self, name: &str, f: &TimeFunction) -> Decided {
        let inf = self.inf(f);
        if inf.v > 0.0 {
            return decide(&format!("inf {name}"), inf, Relation::Gt, Q::exact(0.0));
        }
        if let Periodicity::Periodic(p) = f.simplified().periodicity() {
            let mean = f.integral(self.t0, self.t0 + p) / p;
            return decide(
                &format!("period mean of {name}"),
                Q::new(mean, Soundness::ConservativeSound),
                Relation::Gt,
                Q::exact(0.0),
            );
        }
        decide(&format!("inf {name}"), inf, Relation::Gt, Q::exact(0.0))
    }

    /// UES of `y' + f(t) y = 0` via `liminf ∫_t^{t+R} f > 0` on the grid
    /// `R ∈ {1, τ_max, 10 τ_max}`; returns one alternative per `R`.
    pub fn ode_ues_alternatives(&self, f: &TimeFunction) -> Vec<(f64, Decided)> {
        let tm = self.tau_max();
        let mut grid = vec![1.0];
        if tm > 0.0 {
            grid.push(tm);
            grid.push(10.0 * tm);
        }
        grid.dedup();
        grid.into_iter()
            .map(|r| {
                let q = self.win(f, &TimeFunction::constant(r), ExtremeKind::Liminf);
                (r, decide(&format!("liminf ∫_t^(t+{r}) A"), q, Relation::Gt, Q::exact(0.0)))
            })
            .collect()
    }

    /// Upper bound on `sup_{t ≥ t0} ∫_{t0}^t e^{-∫_s^t a} b(s) ds` for
    /// `a ≥ decay_lo` and `0 ≤ b ≤ forcing_hi`.
    pub fn forced_response_sup(&self, decay_lo: &TimeFunction, forcing_hi: &TimeFunction) -> Q {
        forced_response_sup(decay_lo, forcing_hi, self.t0, &self.scan)
    }
}

/// A decided hypothesis check with the trust level of its inputs.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Decided {
    pub check: HypothesisCheck,
    pub s: Soundness,
}

/// Zero tolerance on exact inputs; a `1e-9` guard band otherwise. Non-strict
/// relations accept a relative rounding slack of `1e-12`.
pub(crate) const GUARD_BAND: f64 = 1e-9;
pub(crate) const NONSTRICT_TOL: f64 = 1e-12;

pub(crate) fn decide(name: &str, lhs: Q, rel: Relation, rhs: Q) -> Decided {
    let slack = rel.slack(lhs.v, rhs.v);
    let exact = lhs.s == Soundness::Exact && rhs.s == Soundness::Exact;
    let satisfied = if slack.is_nan() {
        false
    } else if rel.is_strict() {
        if exact {
            slack > 0.0
        } else {
            slack > GUARD_BAND
        }
    } else {
        let scale = 1f64.max(lhs.v.abs()).max(rhs.v.abs());
        let tol = if scale.is_finite() { NONSTRICT_TOL * scale } else { 0.0 };
        slack >= -tol
    };
    Decided {
        check: HypothesisCheck {
            name: name.to_string(),
            lhs: lhs.v,
            relation: rel,
            rhs: rhs.v,
            satisfied,
        },
        s: lhs.s.weakest(rhs.s),
    }
}

/// Margin of a set of checks: minimum strict slack, else minimum slack.
pub(crate) fn margin_of(checks: &[HypothesisCheck], passed: bool) -> f64 {
    let strict: Vec<f64> = checks
        .iter()
        .filter(|c| c.relation.is_strict())
        .map(HypothesisCheck::slack)
        .collect();
    let pick = if strict.is_empty() {
        checks.iter().map(HypothesisCheck::slack).collect::<Vec<_>>()
    } else {
        strict
    };
    let m = pick.into_iter().fold(f64::INFINITY, |m, s| if s.is_nan() { f64::NAN } else { m.min(s) });
    // A failed check always bounds the margin, strict or not.
    let m = checks
        .iter()
        .filter(|c| !c.satisfied)
        .map(HypothesisCheck::slack)
        .fold(m, |m, s| if s.is_nan() || m.is_nan() { f64::NAN } else { m.min(s) });
    if passed && !checks.iter().any(|c| c.relation.is_strict()) {
        m.max(0.0)
    } else {
        m
    }
}

/// One disjunctive branch under construction.
#[derive(Clone, Debug)]
pub(crate) struct Branch {
    pub label: String,
    pub applicable: bool,
    pub checks: Vec<Decided>,
    pub conclusion: Conclusion,
    pub m_matrix: Option<bool>,
}

impl Branch {
    pub fn new(label: impl Into<String>, conclusion: Conclusion) -> Branch {
        Branch {
            label: label.into(),
            applicable: true,
            checks: Vec::new(),
            conclusion,
            m_matrix: None,
        }
    }

    pub fn inapplicable(label: impl Into<String>, reason: Decided) -> Branch {
        Branch {
            label: label.into(),
            applicable: false,
            checks: vec![reason],
            conclusion: Conclusion::Inconclusive,
            m_matrix: None,
        }
    }

    pub fn push(&mut self, d: Decided) -> &mut Self {
        self.checks.push(d);
        self
    }

    pub fn with(mut self, d: Decided) -> Self {
        self.checks.push(d);
        self
    }

    pub fn satisfied(&self) -> bool {
        self.applicable && self.m_matrix != Some(false) && self.checks.iter().all(|d| d.check.satisfied)
    }

    fn plain_checks(&self) -> Vec<HypothesisCheck> {
        self.checks.iter().map(|d| d.check.clone()).collect()
    }

    fn to_alternative(&self) -> Alternative {
        let checks = self.plain_checks();
        let sat = self.satisfied();
        Alternative {
            label: self.label.clone(),
            applicable: self.applicable,
            margin: margin_of(&checks, sat),
            checks,
            satisfied: sat,
            m_matrix: self.m_matrix,
        }
    }
}

/// Assembles a verdict from common checks and disjunctive branches.
#[derive(Clone, Debug)]
pub(crate) struct Builder {
    pub test_id: String,
    pub common: Vec<Decided>,
    pub branches: Vec<Branch>,
    pub notes: Vec<String>,
    /// Conclusion when there are no branches and all common checks hold.
    pub conclusion: Conclusion,
    /// Report branches as alternatives even when there is only one.
    pub list_alternatives: bool,
}

impl Builder {
    pub fn new(test_id: &str, conclusion: Conclusion) -> Builder {
        Builder {
            test_id: test_id.to_string(),
            common: Vec::new(),
            branches: Vec::new(),
            notes: Vec::new(),
            conclusion,
            list_alternatives: false,
        }
    }

    pub fn check(&mut self, d: Decided) -> &mut Self {
        self.common.push(d);
        self
    }

    pub fn branch(&mut self, b: Branch) -> &mut Self {
        self.branches.push(b);
        self
    }

    pub fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.notes.push(n.into());
        self
    }

    pub fn common_ok(&self) -> bool {
        self.common.iter().all(|d| d.check.satisfied)
    }

    pub fn finish(self) -> Verdict {
        let common_ok = self.common_ok();
        let alternatives: Vec<Alternative> = if self.branches.len() > 1 || self.list_alternatives {
            self.branches.iter().map(Branch::to_alternative).collect()
        } else {
            Vec::new()
        };
        // Preferred branch: satisfied, strongest conclusion, largest margin.
        let chosen = self
            .branches
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                let key = |x: &Branch| {
                    let ca = x.plain_checks();
                    let sat = x.satisfied();
                    (
                        sat,
                        x.applicable,
                        if sat { x.conclusion.strength() } else { 0 },
                        margin_of(&ca, sat),
                    )
                };
                let (ka, kb) = (key(a), key(b));
                ka.0.cmp(&kb.0)
                    .then(ka.1.cmp(&kb.1))
                    .then(ka.2.cmp(&kb.2))
                    .then(ka.3.partial_cmp(&kb.3).unwrap_or(std::cmp::Ordering::Equal))
                    .then(ib.cmp(ia))
            })
            .map(|(_, b)| b.clone());
        let mut decisive: Vec<Decided> = self.common.clone();
        let (passed, conclusion) = match &chosen {
            Some(b) => {
                decisive.extend(b.checks.iter().cloned());
                let ok = common_ok && b.satisfied();
                (ok, if ok { b.conclusion } else { Conclusion::Inconclusive })
            }
            None => (common_ok, if common_ok { self.conclusion } else { Conclusion::Inconclusive }),
        };
        let checks: Vec<HypothesisCheck> = decisive.iter().map(|d| d.check.clone()).collect();
        let soundness = decisive
            .iter()
            .fold(Soundness::Exact, |s, d| s.weakest(d.s));
        let applicable = chosen.as_ref().map_or(true, |b| b.applicable)
            || self.branches.iter().any(|b| b.applicable);
        Verdict {
            test_id: self.test_id,
            applicable,
            conclusion,
            margin: margin_of(&checks, passed),
            hypothesis_checks: checks,
            alternatives,
            soundness: soundness.into(),
            notes: self.notes,
        }
    }
}

/// Upper bound on `sup_{t ≥ t0} K(t)` where `K' = -a K + b`, `K(t0) = 0`,
/// for any `a ≥ decay_lo`, `0 ≤ b ≤ forcing_hi`.
///
/// Each lattice cell uses the frozen worst-case rates from interval
/// enclosures; for periodic data the one-period map `K ↦ ρK + c` yields the
/// invariant level `c / (1 - ρ)` from which one further period bounds every
/// later value.
pub(crate) fn forced_response_sup(
    decay_lo: &TimeFunction,
    forcing_hi: &TimeFunction,
    t0: f64,
    scan: &ScanConfig,
) -> Q {
    let a = decay_lo.simplified();
    let b = forcing_hi.simplified();
    if let (Some(av), Some(bv)) = (a.as_constant(), b.as_constant()) {
        let bv = bv.max(0.0);
        if bv == 0.0 {
            return Q::exact(0.0);
        }
        return if av > 0.0 {
            Q::exact(bv / av)
        } else {
            Q::exact(f64::INFINITY)
        };
    }
    let step = |k: f64, lo: f64, hi: f64| -> (f64, f64, f64) {
        // Returns (K at cell end, cell sup, Σ a_l δ).
        let al = a.enclose(lo, hi).lo;
        let bu = b.enclose(lo, hi).hi.max(0.0);
        let d = hi - lo;
        let decay = (-al * d).exp();
        let gain = if al.abs() * d < 1e-12 { d } else { -(-al * d).exp_m1() / al };
        let next = k * decay + bu * gain;
        (next, k.max(next), al * d)
    };
    let period = match a.periodicity().combine(b.periodicity()) {
        Periodicity::Periodic(p) => Some(p),
        Periodicity::Constant => Some(1.0),
        Periodicity::Aperiodic => None,
    };
    match period {
        Some(p) => {
            let cells = 4096usize;
            let d = p / cells as f64;
            let mut k = 0.0;
            let mut log_rho = 0.0;
            for i in 0..cells {
                let lo = t0 + i as f64 * d;
                let (next, _, l) = step(k, lo, lo + d);
                k = next;
                log_rho += l;
            }
            let rho = (-log_rho).exp();
            if !(rho < 1.0) || !k.is_finite() {
                return Q::new(f64::INFINITY, Soundness::ConservativeSound);
            }
            let mut level = k / (1.0 - rho);
            let mut sup = level;
            for i in 0..cells {
                let lo = t0 + i as f64 * d;
                let (next, s, _) = step(level, lo, lo + d);
                sup = sup.max(s);
                level = next;
            }
            Q::new(sup, Soundness::ConservativeSound)
        }
        None => {
            let span = scan.offset + scan.width;
            let cells = 65536usize;
            let d = span / cells as f64;
            let mut k = 0.0f64;
            let mut sup = 0.0f64;
            for i in 0..cells {
                let lo = t0 + i as f64 * d;
                let (next, s, _) = step(k, lo, lo + d);
                sup = sup.max(s);
                k = next;
            }
            Q::new(sup, Soundness::Heuristic)
        }
    }
}

/// Upper bound on `sup_t ∫_{t-τ}^t e^{-a(t-s)} b(s) ds` for constant
/// `a > 0`, `τ ≥ 0` and `0 ≤ b ≤ b_hi`.
pub(crate) fn window_convolution_sup(
    a: f64,
    b_hi: &TimeFunction,
    tau: f64,
    t0: f64,
    scan: &ScanConfig,
) -> Q {
    let b = b_hi.simplified();
    let kernel_mass = |lo: f64, hi: f64| -> f64 {
        // ∫_lo^hi e^{-a s} ds for distances s measured back from t.
        if a.abs() < 1e-300 {
            hi - lo
        } else {
            ((-a * lo).exp() - (-a * hi).exp()) / a
        }
    };
    if tau == 0.0 {
        return Q::exact(0.0);
    }
    if let Some(bv) = b.as_constant() {
        return Q::exact(bv.max(0.0) * kernel_mass(0.0, tau));
    }
    let (start, span, soundness) = match b.periodicity() {
        Periodicity::Periodic(p) => (t0, p, Soundness::ConservativeSound),
        _ => (t0 + scan.offset, scan.width, Soundness::Heuristic),
    };
    let nt = 512usize;
    let ns = 128usize;
    let dt = span / nt as f64;
    let ds = tau / ns as f64;
    let b_sup = b.enclose(start - tau, start + span).hi.max(0.0);
    let mut w_max = 0.0f64;
    for i in 0..=nt {
        let t = start + i as f64 * dt;
        let mut w = 0.0;
        for k in 0..ns {
            let (u0, u1) = (k as f64 * ds, (k + 1) as f64 * ds);
            let bu = b.enclose(t - u1, t - u0).hi.max(0.0);
            w += bu * kernel_mass(u0, u1);
        }
        w_max = w_max.max(w);
    }
    // Lipschitz slack between lattice points.
    let lip = b_sup * (1.0 + (-a * tau).exp()) + a.abs() * w_max;
    Q::new(w_max + 0.5 * lip * dt, soundness)
}

/// Helper for building a structural precondition failure.
pub(crate) fn not_applicable<T>(reason: impl Into<String>) -> Result<T, CatalogError> {
    Err(CatalogError::NotApplicable(reason.into()))
}
