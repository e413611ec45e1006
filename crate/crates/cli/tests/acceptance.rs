//! Acceptance suite: one PASS/FAIL line per criterion with its runtime.
//! Runs as a plain binary (`harness = false`) so the lines always appear
//! in the `cargo test` output.

use delaycert_cli::{cmd_analyze, cmd_simulate, cmd_verify, exit, Overrides};
use delaycert_core::catalog::{
    evaluate, run_all, test_apriori, test_cor1, CatalogError, Conclusion, OmegaMode, RunOptions, Verdict,
    VerdictSoundness,
};
use delaycert_core::dde_model::corpus::{c2, c3, c3_period};
use delaycert_core::dde_model::{
    exponential_shift, shift_initial_condition, DelaySpec, Equation, InitialCondition, LinearDDE, LinearTerm,
};
use delaycert_core::funcmodel::TimeFunction as F;
use delaycert_core::mmatrix::{inverse_nonnegative, is_m_matrix, SquareMatrix};
use delaycert_core::solver::{
    compute_phi, compute_phi_with_step, falsify, integrate, integrate_linear, FalsifyConfig, PHI_STEP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::{Duration, Instant};
use tempfile::TempDir;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).expect("write config");
    p
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

// ----- 1 -------------------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let v = test_apriori(&c2(), OmegaMode::AllSubsets).map_err(|e| e.to_string())?;
    let alt = |label: &str| {
        v.alternatives
            .iter()
            .find(|a| a.label.starts_with(label))
            .ok_or_else(|| format!("missing alternative {label}"))
    };
    ensure!(!alt("Ω = {1}")?.applicable, "Ω = {{1}} should be not applicable");
    ensure!(!alt("Ω = {2}")?.applicable, "Ω = {{2}} should be not applicable");
    let six = alt("Ω = {1,2}, condition (6)")?;
    let main6 = six.checks.last().expect("checks");
    ensure!(!six.satisfied && close(main6.lhs, 1.2, 1e-12), "condition (6): {:?}", main6);
    let seven = alt("Ω = {1,2}, condition (7)")?;
    let main7 = seven.checks.last().expect("checks");
    ensure!(
        seven.satisfied && close(main7.lhs, 0.4, 1e-12) && close(main7.rhs, 0.6, 1e-12),
        "condition (7): {:?}",
        main7
    );
    ensure!(v.conclusion == Conclusion::Ues, "overall {}", v.conclusion);
    ensure!(close(v.margin, 0.2, 1e-12), "margin {}", v.margin);
    ensure!(six.m_matrix == Some(false) && seven.m_matrix == Some(true), "M-matrix cross-check");
    for case in [1, 2] {
        ensure!(
            matches!(test_cor1(&c2(), case), Err(CatalogError::NotApplicable(_))),
            "COR1-{case} should be not applicable"
        );
    }
    // The same through the command line front end.
    let dir = TempDir::new().unwrap();
    let out = cmd_analyze(&config(&dir, "c2.toml", "tests = \"all\"\n[equation]\ncorpus = \"corpus:C2\"\n"), &Overrides::default());
    ensure!(out.exit_code == exit::OK, "analyze exit {}", out.exit_code);
    let report = out.report.unwrap();
    let th27 = report.verdicts.iter().find(|v| v.test_id == "TH2-7").ok_or("TH2-7 missing")?;
    ensure!(th27.conclusion == Conclusion::Ues && th27.soundness == VerdictSoundness::Sound, "TH2-7 {:?}", th27.conclusion);
    Ok(format!(
        "(6) lhs {} FAIL; (7) {} < {} PASS; singletons NA; UES margin {}",
        main6.lhs, main7.lhs, main7.rhs, v.margin
    ))
}

// ----- 2 -------------------------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let t = c3_period();
    let eq = Equation::Linear(c3());
    let traj = integrate(&eq, &InitialCondition::constant(1.0), 11.0 * t, 1e-4).map_err(|e| e.to_string())?;
    let x1 = traj.value_at(1.0);
    let expected = (1.0 + (-1f64).exp()) / 2.0;
    ensure!(close(x1, 0.683940, 1e-5) && close(x1, expected, 1e-5), "x(1) = {x1}");
    let mut worst = 0f64;
    let n = 20_000;
    for k in 0..=n {
        let s = 10.0 * t * k as f64 / n as f64;
        worst = worst.max((traj.value_at(s + t) - traj.value_at(s)).abs());
    }
    ensure!(worst < 1e-5, "periodicity defect {worst}");
    let b = &c3().terms[1].coef;
    let mean_excess = F::abs(b.clone()).integral(0.0, t) - t;
    ensure!(close(mean_excess, -0.5 + (t - 1.0), 1e-12), "integral {mean_excess}");
    ensure!(mean_excess > -0.5 && mean_excess < -0.2, "integral {mean_excess} outside (-0.5, -0.2)");
    let strongest = run_all(&c3())
        .into_iter()
        .filter(|v| v.soundness == VerdictSoundness::Sound)
        .map(|v| v.conclusion)
        .max_by_key(|c| c.strength())
        .unwrap_or(Conclusion::Inconclusive);
    ensure!(strongest == Conclusion::Inconclusive, "sound verdict {strongest}");
    Ok(format!("x(1) = {x1:.7}; max |x(t+T) - x(t)| = {worst:.1e}; integral = {mean_excess:.6}; no sound verdict"))
}

// ----- 3 -------------------------------------------------------------------------------------

/// Rightmost root of `λ + e^{-λ} = 0` by complex Newton iteration.
fn rightmost_root() -> f64 {
    let (mut re, mut im) = (-0.3f64, 1.3f64);
    for _ in 0..100 {
        // f = λ + e^{-λ}, f' = 1 - e^{-λ}
        let e = (-re).exp();
        let (er, ei) = (e * im.cos(), -e * im.sin());
        let (fr, fi) = (re + er, im + ei);
        let (dr, di) = (1.0 - er, -ei);
        let den = dr * dr + di * di;
        re -= (fr * dr + fi * di) / den;
        im -= (fi * dr - fr * di) / den;
    }
    re
}

fn criterion_3() -> Outcome {
    let oracle = -rightmost_root();
    ensure!(close(oracle, 0.3181, 1e-4), "oracle {oracle}");
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "c1.toml", "[equation]\ncorpus = \"corpus:C1(a=1,tau=1)\"\n");
    let out = cmd_simulate(&cfg, &Overrides::default());
    ensure!(out.exit_code == exit::OK, "simulate exit {}: {:?}", out.exit_code, out.error);
    let nu = out.report.unwrap().simulation.unwrap().decay.ok_or("no decay fit")?.nu;
    let rel = (nu - oracle).abs() / oracle;
    ensure!(rel < 0.03, "nu = {nu}, oracle {oracle}");
    Ok(format!("nu = {nu:.5} vs oracle {oracle:.5} ({:.2}% off)", 100.0 * rel))
}

// ----- 4 -------------------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let p03 = compute_phi(0.3).map_err(|e| e.to_string())?;
    ensure!(close(p03, 1.0, 1e-3), "Phi(0.3) = {p03}");
    let mut prev = f64::NEG_INFINITY;
    let mut worst = 0f64;
    let mut values = Vec::new();
    for k in 0..=10 {
        let tau = 0.4 + 0.1 * k as f64;
        let v = compute_phi_with_step(tau, PHI_STEP).map_err(|e| e.to_string())?;
        let half = compute_phi_with_step(tau, PHI_STEP / 2.0).map_err(|e| e.to_string())?;
        worst = worst.max((v - half).abs());
        ensure!(v >= prev, "Phi not monotone at tau = {tau}: {v} < {prev}");
        prev = v;
        values.push(v);
    }
    ensure!(worst < 1e-4, "step-halving difference {worst}");
    Ok(format!(
        "Phi(0.3) = {p03:.6}; Phi(0.4..1.4) = {:.4} .. {:.4} nondecreasing; halving defect {worst:.1e}",
        values[0], values[10]
    ))
}

// ----- 5 -------------------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "c5.toml",
        "tests = [\"TH2-6\"]\n[equation]\ncorpus = \"corpus:C5\"\n[options]\nomega = [1]\n",
    );
    let out = cmd_analyze(&cfg, &Overrides::default());
    ensure!(out.exit_code == exit::OK, "analyze exit {}: {:?}", out.exit_code, out.error);
    let g = out.report.unwrap().global.ok_or("no global verdict")?;
    ensure!(g.conclusion == Conclusion::Ges, "global {}", g.conclusion);
    ensure!(close(g.margin, 0.25, 1e-12), "margin {}", g.margin);
    let out = cmd_verify(&cfg, &Overrides { csv_dir: Some(dir.path().to_path_buf()), ..Overrides::default() });
    ensure!(out.exit_code == exit::OK, "verify exit {}: {:?}", out.exit_code, out.error);
    let report = out.report.unwrap();
    let f = report.falsification.first().ok_or("no falsification")?;
    ensure!(f.trials.len() == 8, "{} trials", f.trials.len());
    let min_nu = f.trials.iter().map(|t| t.nu.unwrap_or(f64::NEG_INFINITY)).fold(f64::INFINITY, f64::min);
    ensure!(f.trials.iter().all(|t| t.passed) && min_nu > 0.0, "trial failure, min nu {min_nu}");
    Ok(format!("GES margin {}; verify exit 0; 8/8 trials decay (min nu {min_nu:.3})", g.margin))
}

// ----- 6 -------------------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut agree, mut banded) = (0, 0);
    for k in 0..10_000 {
        let n = 2 + k % 2;
        let mut e: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..3.0)).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    e[i * n + j] = -rng.gen_range(0.0..1.5);
                }
            }
        }
        let b = SquareMatrix::new(n, e).map_err(|e| e.to_string())?;
        let m = is_m_matrix(&b);
        let inv = inverse_nonnegative(&b);
        let near = m.minors.iter().any(|d| d.abs() <= 1e-12)
            || inv.inverse.as_ref().is_some_and(|i| i.entries().iter().any(|x| x.abs() <= 1e-12));
        if m.is_m_matrix == inv.nonnegative {
            agree += 1;
        } else if near {
            banded += 1;
        } else {
            return Err(format!("disagreement on {:?}", b.entries()));
        }
    }
    Ok(format!("{agree}/10000 agree, {banded} inside the 1e-12 band"))
}

// ----- 7 -------------------------------------------------------------------------------------

fn random_coefficient(rng: &mut ChaCha8Rng, scale: f64) -> F {
    let offset = rng.gen_range(0.0..scale);
    if rng.gen_bool(0.4) {
        F::constant(offset)
    } else {
        let omega = [0.5, 1.0, 2.0, 3.0][rng.gen_range(0..4)];
        F::sinusoid(offset, rng.gen_range(0.0..1.0) * offset, omega, rng.gen_range(0.0..6.3))
    }
}

fn random_delay(rng: &mut ChaCha8Rng) -> DelaySpec {
    match rng.gen_range(0..5) {
        0 => DelaySpec::constant(0.0),
        1 => {
            let mid = rng.gen_range(0.1..0.9);
            let amp: f64 = rng.gen_range(0.0..(mid - 0.05f64).min(1.0 - mid));
            DelaySpec::with_bound(F::sinusoid(mid, amp, 1.0, rng.gen_range(0.0..6.3)), mid + amp)
        }
        _ => DelaySpec::constant(rng.gen_range(0.05..1.0)),
    }
}

fn random_equation(rng: &mut ChaCha8Rng) -> LinearDDE {
    let n = rng.gen_range(1..=4);
    let terms = (0..n)
        .map(|_| {
            let coef = random_coefficient(rng, 1.5 / n as f64 + 0.3);
            let delay = random_delay(rng);
            if rng.gen_bool(0.15) {
                LinearTerm::minus(F::scaled(0.3, coef), delay)
            } else {
                LinearTerm::plus(coef, delay)
            }
        })
        .collect();
    LinearDDE::new(0.0, terms)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut certified, mut checked, mut simulated) = (0, 0, 0);
    for k in 0..200 {
        let eq = random_equation(&mut rng);
        let sound: Vec<Verdict> = run_all(&eq)
            .into_iter()
            .filter(|v| v.soundness == VerdictSoundness::Sound && v.conclusion.is_stability())
            .collect();
        if sound.is_empty() {
            continue;
        }
        certified += 1;
        checked += sound.len();
        // Trials depend only on the equation and the claimed conclusion.
        let mut done: Vec<Conclusion> = Vec::new();
        for v in &sound {
            if done.contains(&v.conclusion) {
                continue;
            }
            done.push(v.conclusion);
            let cfg = FalsifyConfig { seed: 1000 + k, ..FalsifyConfig::default() };
            let r = falsify(&Equation::Linear(eq.clone()), v, &cfg);
            simulated += r.trials.len();
            if r.violations > 0 || r.trials.len() != 8 {
                let why: Vec<&str> = r.trials.iter().filter(|t| !t.passed).map(|t| t.reason.as_str()).collect();
                return Err(format!("equation {k}: {} {} falsified: {:?}", v.test_id, v.conclusion, why));
            }
        }
    }
    ensure!(certified >= 40, "only {certified} equations certified; the batch is too weak to be meaningful");
    Ok(format!(
        "200 equations, {certified} certified by {checked} sound verdicts, {simulated} trials, 0 violations"
    ))
}

// ----- 8 -------------------------------------------------------------------------------------

fn table(v: &Verdict) -> Vec<(u64, &'static str, u64, bool)> {
    v.hypothesis_checks
        .iter()
        .map(|c| (c.lhs.to_bits(), c.relation.symbol(), c.rhs.to_bits(), c.satisfied))
        .collect()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut compared = 0;
    for k in 0..100 {
        let eq = LinearDDE::new(
            0.0,
            (0..2)
                .map(|_| LinearTerm::plus(random_coefficient(&mut rng, 1.2), DelaySpec::constant(rng.gen_range(0.0..1.0))))
                .collect(),
        );
        let specs = [
            (1u8, "TH2-6", OmegaMode::Subset(vec![0])),
            (2, "TH2-6", OmegaMode::Subset(vec![1])),
            (3, "TH2-6", OmegaMode::Full),
            (4, "TH2-7", OmegaMode::Full),
        ];
        for (case, id, omega) in specs {
            let opts = RunOptions { omega, ..RunOptions::default() };
            match (test_cor1(&eq, case), evaluate(id, &eq, &opts)) {
                (Err(CatalogError::NotApplicable(_)), Err(CatalogError::NotApplicable(_))) => {}
                (Ok(c), Ok(g)) => {
                    let (tc, mut tg) = (table(&c), table(&g));
                    if case == 4 {
                        // `1 - Σ_{∉Ω} ‖a_j/A_Ω‖ > 0` is `1 > 0` for the full index set.
                        ensure!(tg.len() == 3 && tg[1] == (1f64.to_bits(), ">", 0f64.to_bits(), true), "equation {k}");
                        tg.remove(1);
                    }
                    ensure!(
                        tc == tg && c.conclusion == g.conclusion && c.margin.to_bits() == g.margin.to_bits(),
                        "equation {k}, COR1-{case}: {:?} vs {:?}",
                        c.hypothesis_checks,
                        g.hypothesis_checks
                    );
                    compared += 1;
                }
                (c, g) => return Err(format!("equation {k}, COR1-{case}: {c:?} vs {g:?}")),
            }
        }
    }
    let mut worst = 0f64;
    for _ in 0..20 {
        let mut terms = vec![LinearTerm::plus(F::constant(rng.gen_range(0.5..2.0)), DelaySpec::constant(0.0))];
        for _ in 0..rng.gen_range(1..=2) {
            terms.push(LinearTerm::plus(random_coefficient(&mut rng, 1.0), DelaySpec::constant(rng.gen_range(0.1..1.0))));
        }
        let eq = LinearDDE::new(0.0, terms);
        let lam = rng.gen_range(0.1..0.5);
        let shifted = exponential_shift(&eq, lam).map_err(|e| e.to_string())?;
        let psi = F::sinusoid(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.5..2.0), 0.0);
        let ic = InitialCondition::from_function(psi, 0.0);
        let ic_s = shift_initial_condition(&ic, 0.0, lam);
        let x = integrate_linear(&eq, &ic, 8.0, 0.005).map_err(|e| e.to_string())?;
        let y = integrate_linear(&shifted, &ic_s, 8.0, 0.005).map_err(|e| e.to_string())?;
        for i in 0..x.count() {
            worst = worst.max(((-lam * x.time(i)).exp() * y.values[i] - x.values[i]).abs());
        }
    }
    ensure!(worst <= 1e-6, "exponential-shift defect {worst}");
    Ok(format!("{compared} corollary/index-set pairs identical; shift defect {worst:.1e} over 20 equations"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("worked example: a-priori test on C2", Duration::from_secs(1), criterion_1),
        ("periodic counterexample C3", Duration::from_secs(10), criterion_2),
        ("decay-rate oracle C1(1,1)", Duration::from_secs(5), criterion_3),
        ("Phi quadrature", Duration::from_secs(30), criterion_4),
        ("Mackey-Glass GES pipeline C5", Duration::from_secs(20), criterion_5),
        ("M-matrix equivalence", Duration::from_secs(5), criterion_6),
        ("soundness on 200 random equations", Duration::from_secs(300), criterion_7),
        ("corollary and exponential-shift equivalences", Duration::from_secs(60), criterion_8),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > *budget => Err(format!("{detail}; over the {budget:?} budget")),
            other => other,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        if result.is_err() {
            failed += 1;
        }
        println!(
            "criterion {} [{tag}] {name} — {:.2}s (budget {}s): {detail}",
            k + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.2}s",
        criteria.len() - failed,
        criteria.len(),
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
