//! Registry of sufficient stability tests. Every test consumes sound bounds
//! from [`crate::funcmodel`] and emits a uniform [`Verdict`].
//!
//! Tests are pure functions; [`run_all`] may evaluate them concurrently but
//! always returns them in canonical order.

mod apriori;
mod continuous;
mod measurable;
pub(crate) mod model;
mod verdict;

pub use apriori::{test_apriori, test_cor1, AprioriCondition, OmegaMode};
pub use continuous::{
    compute_and_test_phi_band, nonoscillation_check, test_krisztin, test_liz_family,
    test_nondelay_dominant, test_one_delay_32, test_sum_32, test_tang_zou, test_three_term,
    test_zhang, DominantVariant, LizVariant,
};
pub use measurable::{
    test_mixed_signs, test_nondelay, test_one_e_family, test_oscillating_coeff,
    test_oscillatory_sum, test_perturbation, test_perturbation_given, test_positive_part, test_shifted_boundedness,
    test_two_term, MixedVariant, NondelayVariant, OneEVariant, OscSumVariant, OscVariant,
    PerturbationVariant, TwoTermVariant,
};
pub use verdict::{
    ext_float, Alternative, Conclusion, HypothesisCheck, Relation, Verdict, VerdictSoundness,
};

use crate::dde_model::LinearDDE;
use crate::funcmodel::{ScanConfig, TimeFunction};
use model::EqModel;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("soundness of the required bounds cannot be established: {0}")]
    HeuristicBoundsOnly(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown test id '{0}'")]
    UnknownTest(String),
    #[error("test {0} does not support interval coefficients")]
    NotIntervalCapable(String),
}

/// Static description of a registered test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestInfo {
    pub id: &'static str,
    /// Name of the operation implementing the test.
    pub operation: &'static str,
    pub description: &'static str,
    /// Whether the test accepts interval (linearised) coefficients.
    pub interval_capable: bool,
    /// Whether the test needs a base/perturbation pair instead of one equation.
    pub needs_pair: bool,
}

const fn info(
    id: &'static str,
    operation: &'static str,
    description: &'static str,
    interval_capable: bool,
) -> TestInfo {
    TestInfo { id, operation, description, interval_capable, needs_pair: false }
}

const fn pair(id: &'static str, description: &'static str) -> TestInfo {
    TestInfo {
        id,
        operation: "test_perturbation",
        description,
        interval_capable: false,
        needs_pair: true,
    }
}

/// Every registered test, in canonical order.
pub const REGISTRY: &[TestInfo] = &[
    info("LEM34", "nonoscillation_check", "positive fundamental function (1/e integral or exponential witness)", false),
    info("TH20A", "test_one_delay_32", "one delay, integral of the coefficient below 3/2", false),
    info("TH20", "test_krisztin", "several delays, sum of coefficient-delay products below 1", true),
    info("TH20B", "test_sum_32", "ordered delays, integral of the coefficient sum below 3/2", false),
    info("TH21A", "test_nondelay_dominant", "dominant non-delay term", false),
    info("TH21", "test_liz_family", "constant non-delay term, one delayed term", false),
    info("TH22", "test_liz_family", "non-delay term and several delays, nonnegative coefficients", false),
    info("TH24A", "test_zhang", "non-delay term, convolution bound below 1", false),
    info("TH23", "test_three_term", "dominant delayed term with two perturbing terms", false),
    info("TH23A", "compute_and_test_phi_band", "constant coefficients, delay band from the Φ function", false),
    info("TH23C", "test_tang_zou", "constant non-delay term, windowed convolution bound", false),
    info("TH11", "test_one_e_family", "weighted delay integrals below 1 + 1/e", true),
    info("COR3A", "test_one_e_family", "constant coefficient sum, pointwise products below 1 + 1/e", true),
    info("COR3B-INT", "test_one_e_family", "integral over the largest delay below 1 + 1/e", true),
    info("COR3B-PT", "test_one_e_family", "pointwise products below (a0/A)(1 + 1/e)", true),
    info("TH3", "test_oscillating_coeff", "oscillating coefficients with an auxiliary argument", false),
    info("COR5", "test_oscillating_coeff", "oscillating coefficients, weighted delay integrals below 1", false),
    info("COR5A", "test_oscillating_coeff", "autonomous equation with mixed signs", false),
    info("TH6", "test_positive_part", "positive-part equation is nonoscillatory", false),
    info("TH13", "test_oscillatory_sum", "oscillatory coefficient sum, convolution bound", false),
    info("TH14", "test_oscillatory_sum", "coefficient sum split into a positive part and a bounded oscillation", false),
    info("TH8", "test_mixed_signs", "paired positive and negative terms", false),
    info("TH10", "test_mixed_signs", "positive terms dominate negative terms", false),
    pair("COR3-LIMIT", "vanishing perturbation of a UES equation"),
    pair("TH18", "coefficient and delay perturbation of a UES equation"),
    pair("TH19", "delay perturbation of a nonoscillatory equation"),
    info("TH5", "test_two_term", "two delayed terms with positive sum", true),
    info("TH7", "test_two_term", "positive term with the larger delay dominating a negative term", true),
    info("TH12-1", "test_two_term", "positive minus negative term, small delay integral", true),
    info("TH12-2", "test_two_term", "positive minus negative term, large delay integral", true),
    info("TH15", "test_nondelay", "non-delay term, bounded solutions via convolution", true),
    info("COR6A", "test_nondelay", "non-delay term dominates pointwise, bounded solutions", true),
    info("COR6B", "test_nondelay", "non-delay term dominates by a factor below 1", true),
    info("COR1A-A", "test_nondelay", "sum of coefficient ratio norms below 1", true),
    info("TH16", "test_shifted_boundedness", "bounded solutions of the exponentially shifted equation", false),
    info("TH2-6", "test_apriori", "a-priori estimate, condition (6), over index sets", true),
    info("TH2-7", "test_apriori", "a-priori estimate, condition (7), over index sets", true),
    info("COR2", "test_apriori", "a-priori estimate with the full index set", true),
    info("COR1-1", "test_apriori", "two terms, first coefficient separated", true),
    info("COR1-2", "test_apriori", "two terms, second coefficient separated", true),
    info("COR1-3", "test_apriori", "two terms, sum separated, condition (6) form", true),
    info("COR1-4", "test_apriori", "two terms, sum separated, condition (7) form", true),
];

/// Looks up a registered test.
pub fn test_info(id: &str) -> Option<&'static TestInfo> {
    REGISTRY.iter().find(|t| t.id == id)
}

/// Optional parameters for tests that take auxiliary inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub omega: OmegaMode,
    /// Shift for TH16; `None` searches a small grid.
    pub lambda: Option<f64>,
    pub dominant_variant: DominantVariant,
    /// Auxiliary `e(t)` for TH21A variants I and III.
    pub e_aux: Option<TimeFunction>,
    /// `t - r(t)` for TH3.
    pub r_lag: Option<TimeFunction>,
    /// `(ã, α)` split for TH14.
    pub split: Option<(TimeFunction, TimeFunction)>,
    /// Scan window for bound queries; `None` scales with the largest lag.
    pub scan: Option<ScanConfig>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            omega: OmegaMode::AllSubsets,
            lambda: None,
            dominant_variant: DominantVariant::II,
            e_aux: None,
            r_lag: None,
            split: None,
            scan: None,
        }
    }
}

/// Evaluates one registered test on the internal model.
pub(crate) fn evaluate_model(
    id: &str,
    m: &EqModel,
    opts: &RunOptions,
) -> Result<Verdict, CatalogError> {
    let info = test_info(id).ok_or_else(|| CatalogError::UnknownTest(id.to_string()))?;
    if !m.is_point() && !info.interval_capable {
        return Err(CatalogError::NotIntervalCapable(id.to_string()));
    }
    use continuous as c;
    use measurable as me;
    match id {
        "LEM34" => c::nonosc(m, id),
        "TH20A" => c::one_delay_32(m),
        "TH20" => c::krisztin(m),
        "TH20B" => c::sum_32(m),
        "TH21A" => c::nondelay_dominant(m, opts.dominant_variant, opts.e_aux.as_ref()),
        "TH21" => c::liz(m, LizVariant::Th21),
        "TH22" => c::liz(m, LizVariant::Th22),
        "TH24A" => c::zhang(m),
        "TH23" => c::three_term(m),
        "TH23A" => c::phi_band(m),
        "TH23C" => c::tang_zou(m),
        "TH11" => me::one_e(m, OneEVariant::Th11),
        "COR3A" => me::one_e(m, OneEVariant::Cor3a),
        "COR3B-INT" => me::one_e(m, OneEVariant::Cor3bInt),
        "COR3B-PT" => me::one_e(m, OneEVariant::Cor3bPt),
        "TH3" => me::oscillating(m, OscVariant::Th3, opts.r_lag.as_ref()),
        "COR5" => me::oscillating(m, OscVariant::Cor5, None),
        "COR5A" => me::oscillating(m, OscVariant::Cor5a, None),
        "TH6" => me::positive_part(m),
        "TH13" => me::oscillatory_sum(m, OscSumVariant::Th13, None),
        "TH14" => me::oscillatory_sum(m, OscSumVariant::Th14, opts.split.as_ref()),
        "TH8" => me::mixed(m, MixedVariant::Th8),
        "TH10" => me::mixed(m, MixedVariant::Th10),
        "COR3-LIMIT" | "TH18" | "TH19" => Err(CatalogError::NotApplicable(
            "perturbation tests need a base equation, its verdict and a perturbation".into(),
        )),
        "TH5" => me::two_term(m, TwoTermVariant::Th5),
        "TH7" => me::two_term(m, TwoTermVariant::Th7),
        "TH12-1" => me::two_term(m, TwoTermVariant::Th12_1),
        "TH12-2" => me::two_term(m, TwoTermVariant::Th12_2),
        "TH15" => me::nondelay(m, NondelayVariant::Th15),
        "COR6A" => me::nondelay(m, NondelayVariant::Cor6a),
        "COR6B" => me::nondelay(m, NondelayVariant::Cor6b),
        "COR1A-A" => me::nondelay(m, NondelayVariant::Cor1aA),
        "TH16" => me::shifted(m, opts.lambda),
        "TH2-6" => apriori::apriori(m, id, &opts.omega, AprioriCondition::Six),
        "TH2-7" => apriori::apriori(m, id, &opts.omega, AprioriCondition::Seven),
        "COR2" => apriori::apriori(m, id, &OmegaMode::Full, AprioriCondition::Either),
        "COR1-1" => apriori::cor1(m, 1),
        "COR1-2" => apriori::cor1(m, 2),
        "COR1-3" => apriori::cor1(m, 3),
        "COR1-4" => apriori::cor1(m, 4),
        other => Err(CatalogError::UnknownTest(other.to_string())),
    }
}

/// Converts an error into a non-applicable verdict.
pub fn verdict_from_error(id: &str, e: CatalogError) -> Verdict {
    Verdict::not_applicable(id, e.to_string())
}

/// Canonical order: conclusion strength, then margin (descending), then id.
pub fn sort_verdicts(v: &mut [Verdict]) {
    v.sort_by(|a, b| {
        b.conclusion
            .strength()
            .cmp(&a.conclusion.strength())
            .then_with(|| {
                let (ma, mb) = (a.margin, b.margin);
                mb.partial_cmp(&ma).unwrap_or_else(|| ma.is_nan().cmp(&mb.is_nan()))
            })
            .then_with(|| a.test_id.cmp(&b.test_id))
    });
}

pub(crate) fn run_model(m: &EqModel, ids: &[&str], opts: &RunOptions) -> Vec<Verdict> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8).max(1);
    let mut out: Vec<Option<Verdict>> = vec![None; ids.len()];
    std::thread::scope(|scope| {
        let chunks: Vec<_> = out
            .chunks_mut(ids.len().div_ceil(workers).max(1))
            .zip(ids.chunks(ids.len().div_ceil(workers).max(1)))
            .map(|(slots, names)| {
                scope.spawn(move || {
                    for (slot, id) in slots.iter_mut().zip(names) {
                        let v = evaluate_model(id, m, opts)
                            .unwrap_or_else(|e| verdict_from_error(id, e));
                        debug_assert!(
                            v.invariant_violation().is_none(),
                            "{:?}",
                            v.invariant_violation()
                        );
                        *slot = Some(v);
                    }
                })
            })
            .collect();
        for c in chunks {
            c.join().expect("test evaluation panicked");
        }
    });
    let mut v: Vec<Verdict> = out.into_iter().map(|v| v.expect("every slot filled")).collect();
    sort_verdicts(&mut v);
    v
}

/// Runs every registered single-equation test with default options.
pub fn run_all(eq: &LinearDDE) -> Vec<Verdict> {
    run_all_with(eq, &RunOptions::default())
}

pub fn run_all_with(eq: &LinearDDE, opts: &RunOptions) -> Vec<Verdict> {
    let ids: Vec<&str> = REGISTRY.iter().filter(|t| !t.needs_pair).map(|t| t.id).collect();
    match model_with(eq, opts) {
        Ok(m) => run_model(&m, &ids, opts),
        Err(e) => {
            let mut v: Vec<Verdict> =
                ids.iter().map(|id| verdict_from_error(id, e.clone())).collect();
            sort_verdicts(&mut v);
            v
        }
    }
}

/// Runs the listed tests; unknown ids are an error.
pub fn run_selected(
    eq: &LinearDDE,
    ids: &[&str],
    opts: &RunOptions,
) -> Result<Vec<Verdict>, CatalogError> {
    for id in ids {
        if test_info(id).is_none() {
            return Err(CatalogError::UnknownTest(id.to_string()));
        }
    }
    Ok(match model_with(eq, opts) {
        Ok(m) => run_model(&m, ids, opts),
        Err(e) => {
            let mut v: Vec<Verdict> =
                ids.iter().map(|id| verdict_from_error(id, e.clone())).collect();
            sort_verdicts(&mut v);
            v
        }
    })
}

/// Evaluates one registered test by id.
pub fn evaluate(id: &str, eq: &LinearDDE, opts: &RunOptions) -> Result<Verdict, CatalogError> {
    evaluate_model(id, &model_with(eq, opts)?, opts)
}

fn model_with(eq: &LinearDDE, opts: &RunOptions) -> Result<EqModel, CatalogError> {
    let mut m = EqModel::from_linear(eq)?;
    m.apply_scan(opts);
    Ok(m)
}
