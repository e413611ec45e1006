use super::*;
use crate::catalog::{Conclusion, Verdict};
use crate::dde_model::corpus::{c1, c2, c3, c3_period, c5};
use crate::dde_model::{exponential_shift, shift_initial_condition, DelaySpec, LinearTerm};
use crate::funcmodel::TimeFunction as F;

/// Rightmost root of `λ + e^{-λ} = 0` by complex Newton iteration.
fn rightmost_root() -> (f64, f64) {
    let (mut re, mut im) = (-0.3f64, 1.3f64);
    for _ in 0..50 {
        // f = λ + e^{-λ}, f' = 1 - e^{-λ}
        let e = (-re).exp();
        let (er, ei) = (e * im.cos(), -e * im.sin());
        let (fr, fi) = (re + er, im + ei);
        let (dr, di) = (1.0 - er, -ei);
        let den = dr * dr + di * di;
        re -= (fr * dr + fi * di) / den;
        im -= (fi * dr - fr * di) / den;
    }
    (re, im)
}

fn samples(f: impl Fn(f64) -> f64, step: f64, n: usize) -> Trajectory {
    let values: Vec<f64> = (0..n).map(|k| f(k as f64 * step)).collect();
    Trajectory {
        start: 0.0,
        step,
        metadata: TrajectoryMeta {
            max_abs: values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            residual_estimate: 0.0,
            psi_sup: 1.0,
        },
        values,
        equation_id: "samples".into(),
        initial_id: "none".into(),
        nodes: Vec::new(),
    }
}

fn verdict(conclusion: Conclusion) -> Verdict {
    let mut v = Verdict::not_applicable("TEST", "constructed".into());
    v.applicable = true;
    v.conclusion = conclusion;
    v.margin = 1.0;
    v
}

#[test]
fn oracle_root() {
    let (re, im) = rightmost_root();
    assert!((re + 0.3181315052047641).abs() < 1e-12);
    assert!((im - 1.3372357014306895).abs() < 1e-12);
}

#[test]
fn ode_matches_exponential() {
    let tr = integrate_linear(&c1(1.0, 0.0), &InitialCondition::constant(1.0), 1.0, 1e-3).unwrap();
    assert!((tr.values.last().unwrap() - (-1.0f64).exp()).abs() < 1e-8);
    assert!((tr.end() - 1.0).abs() < 1e-12);
}

#[test]
fn c3_first_value() {
    let tr = integrate_linear(&c3(), &InitialCondition::constant(1.0), 2.0, 1e-3).unwrap();
    let x1 = tr.value_at(1.0);
    assert!((x1 - (1.0 + (-1.0f64).exp()) / 2.0).abs() < 1e-6, "{x1}");
}

#[test]
fn zero_equation_is_constant() {
    let psi = F::sinusoid(0.0, 1.0, 3.0, 0.5);
    let ic = InitialCondition::from_function(psi.clone(), 0.0);
    let tr = integrate_linear(&c1(0.0, 1.0), &ic, 5.0, 0.01).unwrap();
    for v in &tr.values {
        assert_eq!(*v, psi.eval(0.0));
    }
}

#[test]
fn rejects_bad_grids() {
    let ic = InitialCondition::constant(1.0);
    assert!(matches!(integrate_linear(&c1(1.0, 0.1), &ic, 1.0, 0.2), Err(SolverError::StepTooLarge { .. })));
    assert!(matches!(integrate_linear(&c1(1.0, 0.1), &ic, 0.0, 0.01), Err(SolverError::InvalidHorizon { .. })));
    assert!(matches!(integrate_linear(&c1(1.0, 0.1), &ic, 1.0, -0.01), Err(SolverError::InvalidStep(_))));
    assert!(matches!(
        integrate_linear(&c1(-5.0, 1.0), &ic, 400.0, 0.01),
        Err(SolverError::Overflow { .. })
    ));
}

#[test]
fn fundamental_function_examples() {
    let tr = fundamental_function(&c1(2.0, 0.0), 1.0, 3.0, 1e-3).unwrap();
    for k in 0..tr.count() {
        assert!((tr.values[k] - (-2.0 * (tr.time(k) - 1.0)).exp()).abs() < 1e-8);
    }
    let tr = fundamental_function(&c1(1.0, 0.3), 0.0, 50.0, 1e-2).unwrap();
    assert!(check_positivity(&tr).positive);
    let tr = fundamental_function(&c1(1.0, 1.6), 0.0, 20.0, 1e-2).unwrap();
    let p = check_positivity(&tr);
    assert!(!p.positive && p.first_sign_change.unwrap() < 20.0);
    assert!(fundamental_function(&c1(1.0, 1.0), -1.0, 2.0, 0.01).is_err());
}

#[test]
fn decay_examples() {
    let fit = estimate_decay(&samples(|t| (-0.5 * t).exp(), 0.01, 4000), 0.5).unwrap();
    assert!((fit.nu - 0.5).abs() < 1e-3, "{}", fit.nu);
    let tr = fundamental_function(&c1(1.0, 1.0), 0.0, 80.0, 1e-2).unwrap();
    let fit = estimate_decay(&tr, 0.5).unwrap();
    let nu = -rightmost_root().0;
    assert!((fit.nu - nu).abs() < 0.03 * nu, "{} vs {nu}", fit.nu);
    let tr = integrate_linear(&c3(), &InitialCondition::constant(1.0), 60.0, 1e-3).unwrap();
    let fit = estimate_decay(&tr, 0.5).unwrap();
    assert!(fit.nu.abs() < 1e-3, "{}", fit.nu);
    let zero = estimate_decay(&samples(|_| 0.0, 0.01, 200), 0.5).unwrap();
    assert!(zero.zero_tail && zero.nu == f64::INFINITY);
    let grow = estimate_decay(&samples(|t| (0.2 * t).exp() * (3.0 * t).cos(), 0.01, 4000), 0.5).unwrap();
    assert!(grow.nu < 0.0);
    assert!(matches!(estimate_decay(&samples(|t| t, 0.1, 60), 0.5), Err(SolverError::TooShort { .. })));
}

#[test]
fn positivity_examples() {
    assert!(check_positivity(&samples(|t| (-t).exp(), 0.01, 500)).positive);
    let p = check_positivity(&samples(f64::cos, 0.001, 5000));
    assert!((p.first_sign_change.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 2e-3);
}

#[test]
fn phi_examples() {
    assert_eq!(compute_phi(0.0).unwrap(), 1.0);
    assert!((compute_phi(0.3).unwrap() - 1.0).abs() < 1e-3);
    let a = compute_phi(1.0).unwrap();
    let b = compute_phi_with_step(1.0, PHI_STEP / 2.0).unwrap();
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    assert!(matches!(compute_phi(1.6), Err(SolverError::NotDecaying(_))));
    assert!(compute_phi(-0.1).is_err());
    let grid: Vec<f64> = [0.4, 0.6, 0.8, 1.0, 1.2, 1.4].iter().map(|&t| compute_phi(t).unwrap()).collect();
    for w in grid.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{grid:?}");
    }
}

#[test]
fn linearity() {
    let eq = c2();
    let p1 = InitialCondition::from_function(F::sinusoid(0.3, 1.0, 2.0, 0.1), 0.0);
    let p2 = InitialCondition::from_function(F::sinusoid(-0.5, 0.7, 5.0, 1.0), 0.0);
    let sum = InitialCondition::from_function(F::sum(vec![p1.psi.clone(), p2.psi.clone()]), 0.0);
    let scaled = InitialCondition::from_function(F::scaled(3.0, p1.psi.clone()), 0.0);
    let (a, b) = (integrate_linear(&eq, &p1, 10.0, 0.01).unwrap(), integrate_linear(&eq, &p2, 10.0, 0.01).unwrap());
    let s = integrate_linear(&eq, &sum, 10.0, 0.01).unwrap();
    let c = integrate_linear(&eq, &scaled, 10.0, 0.01).unwrap();
    let norm = a.metadata.psi_sup + b.metadata.psi_sup;
    for k in 0..s.count() {
        assert!((s.values[k] - a.values[k] - b.values[k]).abs() <= 1e-8 * norm);
        assert!((c.values[k] - 3.0 * a.values[k]).abs() <= 1e-8 * 3.0 * a.metadata.psi_sup);
    }
}

#[test]
fn step_halving_convergence() {
    // Smooth initial data compatible with the equation at t0 keeps interior
    // behaviour fourth order.
    let eq = LinearDDE::new(
        0.0,
        vec![LinearTerm::plus(F::sinusoid(1.0, 0.3, 1.0, 0.0), DelaySpec::constant(0.5))],
    );
    let ic = InitialCondition::constant(1.0);
    let run = |h: f64| integrate_linear(&eq, &ic, 4.0, h).unwrap();
    let (h1, h2, h3) = (run(0.02), run(0.01), run(0.005));
    let diff = |a: &Trajectory, b: &Trajectory| {
        (0..a.count()).map(|k| (a.values[k] - b.value_at(a.time(k))).abs()).fold(0.0, f64::max)
    };
    let (d1, d2) = (diff(&h1, &h2), diff(&h2, &h3));
    assert!(d1 / d2 >= 2.0, "ratio {}", d1 / d2);
    let rk_only = LinearDDE::new(0.0, vec![LinearTerm::plus(F::sinusoid(1.0, 0.3, 1.0, 0.0), DelaySpec::constant(0.0))]);
    let run = |h: f64| integrate_linear(&rk_only, &ic, 4.0, h).unwrap();
    let (h1, h2, h3) = (run(0.04), run(0.02), run(0.01));
    let (d1, d2) = (diff(&h1, &h2), diff(&h2, &h3));
    assert!(d1 / d2 >= 8.0, "ratio {}", d1 / d2);
}

#[test]
fn c3_is_periodic() {
    let t = c3_period();
    let tr = integrate_linear(&c3(), &InitialCondition::constant(1.0), 11.0 * t, 1e-4).unwrap();
    let mut worst = 0.0f64;
    let mut s = 0.0;
    while s <= 10.0 * t {
        worst = worst.max((tr.value_at(s + t) - tr.value_at(s)).abs());
        s += 0.01;
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn exponential_shift_consistency() {
    let eq = crate::dde_model::corpus::c4();
    let lam = 0.3;
    let shifted = exponential_shift(&eq, lam).unwrap();
    let ic = InitialCondition::from_function(F::sinusoid(0.2, 1.0, 1.5, 0.0), 0.0);
    let ic_s = shift_initial_condition(&ic, 0.0, lam);
    let x = integrate_linear(&eq, &ic, 8.0, 0.005).unwrap();
    let y = integrate_linear(&shifted, &ic_s, 8.0, 0.005).unwrap();
    for k in 0..x.count() {
        let t = x.time(k);
        assert!(((-lam * t).exp() * y.values[k] - x.values[k]).abs() < 1e-6);
    }
}

#[test]
fn csv_export() {
    let tr = integrate_linear(&c1(1.0, 0.5), &InitialCondition::constant(1.0), 0.1, 0.05).unwrap();
    let csv = tr.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,x");
    assert_eq!(lines.len(), tr.count() + 1);
}

#[test]
fn falsify_examples() {
    let report = falsify(&Equation::Linear(c2()), &verdict(Conclusion::Ues), &FalsifyConfig::default());
    assert_eq!(report.trials.len(), 8);
    assert!(report.is_clean(), "{:?}", report.trials);
    let ics = vec![
        ("psi=2".to_string(), InitialCondition::constant(2.0)),
        ("psi=-1".to_string(), InitialCondition::constant(-1.0)),
    ];
    let report = falsify_with(&Equation::Nonlinear(c5()), &verdict(Conclusion::Ges), &ics, &FalsifyConfig::default());
    assert!(report.is_clean(), "{:?}", report.trials);
    let report = falsify(&Equation::Linear(c3()), &verdict(Conclusion::As), &FalsifyConfig::default());
    assert!(report.violations > 0);
    assert!(report.violating().all(|t| t.trajectory.is_some()));
    let again = falsify(&Equation::Linear(c3()), &verdict(Conclusion::As), &FalsifyConfig::default());
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
    let report = falsify(&Equation::Linear(c1(1.0, 0.3)), &verdict(Conclusion::Nonoscillatory), &FalsifyConfig::default());
    assert!(report.is_clean());
    let report = falsify(&Equation::Linear(c1(1.0, 1.6)), &verdict(Conclusion::Nonoscillatory), &FalsifyConfig::default());
    assert!(!report.is_clean());
}
