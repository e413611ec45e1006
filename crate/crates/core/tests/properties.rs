use delaycert_core::catalog::{
    evaluate, run_all, test_cor1, CatalogError, Conclusion, OmegaMode, RunOptions, Verdict,
};
use delaycert_core::dde_model::{DelaySpec, LinearDDE, LinearTerm};
use delaycert_core::funcmodel::{integral, sup_abs, ScanConfig, TimeFunction, Window};
use delaycert_core::mmatrix::{inverse_nonnegative, is_m_matrix, SquareMatrix};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// Fixed-seed configuration so that every run explores the same cases.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x0DE1_A7ED), failure_persistence: None, ..ProptestConfig::default() }
}

/// Constant or sinusoidal nonnegative coefficient; the frequencies share
/// the common period 4π.
fn coefficient() -> impl Strategy<Value = TimeFunction> {
    prop_oneof![
        (0.0..1.5f64).prop_map(TimeFunction::constant),
        (0.0..1.5f64, 0.0..1.0f64, prop::sample::select(vec![0.5, 1.0, 1.5, 2.0, 3.0]), 0.0..6.3f64)
            .prop_map(|(off, amp, w, ph)| TimeFunction::sinusoid(off, amp * off, w, ph)),
    ]
}

fn two_term_equation() -> impl Strategy<Value = LinearDDE> {
    (coefficient(), coefficient(), 0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b, t1, t2)| {
        LinearDDE::new(
            0.0,
            vec![
                LinearTerm::plus(a, DelaySpec::constant(t1)),
                LinearTerm::plus(b, DelaySpec::constant(t2)),
            ],
        )
    })
}

fn equation() -> impl Strategy<Value = LinearDDE> {
    prop::collection::vec((coefficient(), 0.0..1.0f64), 1..=4).prop_map(|terms| {
        LinearDDE::new(
            0.0,
            terms.into_iter().map(|(c, tau)| LinearTerm::plus(c, DelaySpec::constant(tau))).collect(),
        )
    })
}

fn scale_lags(eq: &LinearDDE, theta: f64) -> LinearDDE {
    let mut out = eq.clone();
    for t in &mut out.terms {
        let tau = t.delay.constant_value().expect("constant lag");
        t.delay = DelaySpec::constant(theta * tau);
    }
    out
}

fn z_matrix(n: usize) -> impl Strategy<Value = SquareMatrix> {
    prop::collection::vec(-2.0..3.0f64, n * n).prop_map(move |mut e| {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    e[i * n + j] = -e[i * n + j].abs() * 0.5;
                }
            }
        }
        SquareMatrix::new(n, e).unwrap()
    })
}

/// Predicate-level view of a hypothesis table: values, relations and outcomes.
fn table(v: &Verdict) -> Vec<(u64, String, u64, bool)> {
    v.hypothesis_checks
        .iter()
        .map(|c| (c.lhs.to_bits(), c.relation.symbol().to_string(), c.rhs.to_bits(), c.satisfied))
        .collect()
}

proptest! {
    #![proptest_config(config(10_000))]

    #[test]
    fn m_matrix_matches_nonnegative_inverse(b in prop_oneof![z_matrix(2), z_matrix(3)]) {
        let m = is_m_matrix(&b);
        let inv = inverse_nonnegative(&b);
        // Stay clear of the tolerance band around singular and boundary cases.
        prop_assume!(m.minors.iter().all(|d| d.abs() > 1e-9));
        if let Some(i) = &inv.inverse {
            prop_assume!(i.entries().iter().all(|x| x.abs() > 1e-9));
        }
        prop_assert_eq!(m.is_m_matrix, inv.nonnegative);
    }
}

proptest! {
    #![proptest_config(config(2_000))]

    #[test]
    fn positive_off_diagonal_is_never_m_matrix(b in z_matrix(3), i in 0..3usize, d in 1..3usize, v in 1e-6..1.0f64) {
        let j = (i + d) % 3;
        let mut e = b.entries().to_vec();
        e[i * 3 + j] = v;
        prop_assert!(!is_m_matrix(&SquareMatrix::new(3, e).unwrap()).is_m_matrix);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn corollary_matches_apriori_specialisations(eq in two_term_equation()) {
        let specs = [
            (1u8, "TH2-6", OmegaMode::Subset(vec![0])),
            (2, "TH2-6", OmegaMode::Subset(vec![1])),
            (3, "TH2-6", OmegaMode::Full),
            (4, "TH2-7", OmegaMode::Full),
        ];
        for (case, id, omega) in specs {
            let opts = RunOptions { omega, ..RunOptions::default() };
            let cor = test_cor1(&eq, case);
            let gen = evaluate(id, &eq, &opts);
            match (cor, gen) {
                (Err(CatalogError::NotApplicable(_)), Err(CatalogError::NotApplicable(_))) => {}
                (Ok(c), Ok(g)) => {
                    prop_assert_eq!(c.conclusion, g.conclusion, "case {}", case);
                    let (tc, mut tg) = (table(&c), table(&g));
                    if case == 4 {
                        // The general form adds `1 - Σ_{∉Ω} > 0`, which is `1 > 0` here.
                        prop_assert_eq!(&tg[1], &(1f64.to_bits(), ">".to_string(), 0f64.to_bits(), true));
                        tg.remove(1);
                    }
                    prop_assert_eq!(tc, tg, "case {}", case);
                    prop_assert_eq!(c.margin.to_bits(), g.margin.to_bits(), "case {}", case);
                }
                (c, g) => prop_assert!(false, "case {}: {:?} vs {:?}", case, c, g),
            }
        }
    }

    #[test]
    fn shorter_lags_never_lower_margins(eq in equation(), theta in 0.05..1.0f64) {
        let short = scale_lags(&eq, theta);
        // The scan window is held fixed: by default it scales with the lags.
        let opts = RunOptions { scan: Some(eq.scan_config()), ..RunOptions::default() };
        for id in ["TH20", "COR3A", "TH2-6", "TH2-7"] {
            if let (Ok(long), Ok(short)) = (evaluate(id, &eq, &opts), evaluate(id, &short, &opts)) {
                prop_assert!(short.margin >= long.margin - 1e-9, "{}: {} < {}", id, short.margin, long.margin);
                if long.conclusion != Conclusion::Inconclusive {
                    prop_assert!(short.conclusion != Conclusion::Inconclusive, "{}", id);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn every_verdict_satisfies_the_structural_invariant(eq in equation()) {
        for v in run_all(&eq) {
            prop_assert!(v.invariant_violation().is_none(), "{:?}", v.invariant_violation());
            if v.conclusion != Conclusion::Inconclusive {
                prop_assert!(v.hypothesis_checks.iter().all(|c| c.satisfied));
            }
        }
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn scaled_sup_is_exact(f in coefficient(), k in -3.0..3.0f64) {
        let scan = ScanConfig::default();
        let w = Window::halfline(0.0);
        let base = sup_abs(&f, w, &scan).value;
        let scaled = sup_abs(&TimeFunction::scaled(k, f), w, &scan).value;
        prop_assert!((scaled - k.abs() * base).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn integral_is_additive(f in coefficient(), a in -5.0..5.0f64, d1 in 0.0..5.0f64, d2 in 0.0..5.0f64) {
        let (b, c) = (a + d1, a + d1 + d2);
        let i = |x, y| integral(&f, x, y).unwrap();
        prop_assert!((i(a, b) + i(b, c) - i(a, c)).abs() < 1e-12 * (1.0 + c - a));
    }
}
