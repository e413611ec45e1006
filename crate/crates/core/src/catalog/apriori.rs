//! A-priori estimate tests over index sets `Ω` for which the partial sum
//! `A_Ω = Σ_{j∈Ω} a_j` is separated from zero.

use super::model::{decide, not_applicable, q_sum, Branch, Builder, EqModel, Q};
use super::verdict::{Conclusion, Relation, Verdict};
use super::CatalogError;
use crate::dde_model::LinearDDE;
use crate::mmatrix::{is_m_matrix, SquareMatrix};

/// Which index sets `Ω` to try (0-based term indices).
#[derive(Clone, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum OmegaMode {
    /// All nonempty subsets for up to 12 terms; singletons and the full set
    /// otherwise.
    #[default]
    AllSubsets,
    /// Only the full index set.
    Full,
    /// One explicit index set.
    Subset(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AprioriCondition {
    Six,
    Seven,
    Either,
}

const MAX_EXHAUSTIVE: usize = 12;

fn omegas(m: &EqModel, mode: &OmegaMode) -> Result<Vec<Vec<usize>>, CatalogError> {
    let n = m.n();
    Ok(match mode {
        OmegaMode::Full => vec![m.all()],
        OmegaMode::Subset(v) => {
            if v.is_empty() || v.iter().any(|&j| j >= n) {
                return Err(CatalogError::InvalidParameter(format!(
                    "index set {v:?} is empty or out of range for {n} terms"
                )));
            }
            let mut v = v.clone();
            v.sort_unstable();
            v.dedup();
            vec![v]
        }
        OmegaMode::AllSubsets if n <= MAX_EXHAUSTIVE => (1u32..(1u32 << n))
            .map(|mask| (0..n).filter(|&j| mask & (1 << j) != 0).collect())
            .collect(),
        OmegaMode::AllSubsets => {
            let mut v: Vec<Vec<usize>> = (0..n).map(|j| vec![j]).collect();
            v.push(m.all());
            v
        }
    })
}

fn label(omega: &[usize]) -> String {
    let ids: Vec<String> = omega.iter().map(|j| (j + 1).to_string()).collect();
    format!("Ω = {{{}}}", ids.join(","))
}

fn m_matrix(rows: [[f64; 2]; 2]) -> bool {
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return false;
    }
    SquareMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()])
        .map(|b| is_m_matrix(&b).is_m_matrix)
        .unwrap_or(false)
}

/// Quantities shared by both conditions for one `Ω`.
struct OmegaData {
    sep: super::model::Decided,
    /// `Σ_{j∈Ω} τ_j ‖a_j / A_Ω‖`.
    p: Q,
    /// `Σ_{j∉Ω} ‖a_j / A_Ω‖`.
    s: Q,
}

fn omega_data(m: &EqModel, omega: &[usize]) -> Result<OmegaData, super::model::Decided> {
    let sep = decide("inf A_Ω", m.inf(&m.sum_lo(omega)), Relation::Gt, Q::exact(0.0));
    if !sep.check.satisfied {
        return Err(sep);
    }
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for j in m.all() {
        let Some(r) = m.omega_ratio(j, omega) else {
            return Err(sep);
        };
        if omega.contains(&j) {
            inside.push(m.tau(j) * r);
        } else {
            outside.push(r);
        }
    }
    Ok(OmegaData { sep, p: q_sum(inside), s: q_sum(outside) })
}

pub(crate) fn apriori(
    m: &EqModel,
    id: &str,
    mode: &OmegaMode,
    cond: AprioriCondition,
) -> Result<Verdict, CatalogError> {
    if m.n() == 0 {
        return not_applicable("the equation has no terms");
    }
    let all = m.all();
    let big_n = q_sum(all.iter().map(|&j| m.norm(j)));
    let q = q_sum(all.iter().map(|&j| m.tau(j) * m.norm(j)));
    let norm_a = m.norm_sum(&all);
    let mut b = Builder::new(id, Conclusion::Ues);
    b.list_alternatives = true;
    let mut any = false;
    for omega in omegas(m, mode)? {
        let lab = label(&omega);
        let data = match omega_data(m, &omega) {
            Ok(d) => d,
            Err(reason) => {
                b.branch(Branch::inapplicable(lab, reason));
                continue;
            }
        };
        any = true;
        let one = Q::exact(1.0);
        if matches!(cond, AprioriCondition::Six | AprioriCondition::Either) {
            let mut br = Branch::new(format!("{lab}, condition (6)"), Conclusion::Ues)
                .with(data.sep.clone())
                .with(decide(
                    "Σ‖a_j‖ Σ_Ω τ_j ‖a_j/A_Ω‖ + Σ_{∉Ω} ‖a_j/A_Ω‖",
                    big_n * data.p + data.s,
                    Relation::Lt,
                    one,
                ));
            br.m_matrix = Some(m_matrix([[1.0 - data.s.v, -data.p.v], [-big_n.v, 1.0]]));
            b.branch(br);
        }
        if matches!(cond, AprioriCondition::Seven | AprioriCondition::Either) {
            let mut br = Branch::new(format!("{lab}, condition (7)"), Conclusion::Ues)
                .with(data.sep.clone())
                .with(decide("1 - Σ_{∉Ω} ‖a_j/A_Ω‖", one - data.s, Relation::Gt, Q::exact(0.0)))
                .with(decide(
                    "‖A‖ Σ_Ω τ_j ‖a_j/A_Ω‖",
                    norm_a * data.p,
                    Relation::Lt,
                    (one - q) * (one - data.s),
                ));
            br.m_matrix =
                Some(m_matrix([[1.0 - data.s.v, -data.p.v], [-norm_a.v, 1.0 - q.v]]));
            b.branch(br);
        }
    }
    if !any {
        return not_applicable("no index set has a partial coefficient sum separated from zero");
    }
    Ok(b.finish())
}

/// A-priori estimate test over the index sets selected by `mode`, trying
/// both conditions.
pub fn test_apriori(eq: &LinearDDE, mode: OmegaMode) -> Result<Verdict, CatalogError> {
    apriori(&EqModel::from_linear(eq)?, "TH2", &mode, AprioriCondition::Either)
}

/// The four two-term corollaries, evaluated from their own formulas.
pub(crate) fn cor1(m: &EqModel, case: u8) -> Result<Verdict, CatalogError> {
    if m.n() != 2 {
        return not_applicable("exactly two terms are required");
    }
    let id = format!("COR1-{case}");
    let (t1, t2) = (m.tau(0), m.tau(1));
    let (n1, n2) = (m.norm(0), m.norm(1));
    let zero = Q::exact(0.0);
    let one = Q::exact(1.0);
    let mut b = Builder::new(&id, Conclusion::Ues);
    match case {
        1 | 2 => {
            let (own, other, tau) = if case == 1 { (0, 1, t1) } else { (1, 0, t2) };
            let sep = decide(
                &format!("inf a_{}", own + 1),
                m.inf(&m.terms[own].lo()),
                Relation::Gt,
                zero,
            );
            if !sep.check.satisfied {
                return not_applicable(format!("a_{} is not separated from zero", own + 1));
            }
            let Some(r) = m.omega_ratio(other, &[own]) else {
                return not_applicable(format!("a_{} is not separated from zero", own + 1));
            };
            b.check(sep);
            b.check(decide(
                &format!("τ_{}(‖a_1‖+‖a_2‖) + ‖a_{}/a_{}‖", own + 1, other + 1, own + 1),
                (n1 + n2) * tau + r,
                Relation::Lt,
                one,
            ));
        }
        3 | 4 => {
            let sep = decide("inf (a_1+a_2)", m.inf(&m.sum_lo(&[0, 1])), Relation::Gt, zero);
            if !sep.check.satisfied {
                return not_applicable("a_1 + a_2 is not separated from zero");
            }
            let (Some(r1), Some(r2)) = (m.omega_ratio(0, &[0, 1]), m.omega_ratio(1, &[0, 1])) else {
                return not_applicable("a_1 + a_2 is not separated from zero");
            };
            let weighted = t1 * r1 + t2 * r2;
            b.check(sep);
            if case == 3 {
                b.check(decide(
                    "(‖a_1‖+‖a_2‖)(τ_1‖a_1/A‖ + τ_2‖a_2/A‖)",
                    (n1 + n2) * weighted,
                    Relation::Lt,
                    one,
                ));
            } else {
                b.check(decide(
                    "‖A‖(τ_1‖a_1/A‖ + τ_2‖a_2/A‖)",
                    m.norm_sum(&[0, 1]) * weighted,
                    Relation::Lt,
                    one - (t1 * n1 + t2 * n2),
                ));
            }
        }
        _ => return Err(CatalogError::InvalidParameter(format!("no corollary case {case}"))),
    }
    Ok(b.finish())
}

/// Two-term corollary `case ∈ {1, 2, 3, 4}`.
pub fn test_cor1(eq: &LinearDDE, case: u8) -> Result<Verdict, CatalogError> {
    cor1(&EqModel::from_linear(eq)?, case)
}
