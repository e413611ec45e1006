use delaycert_cli::report::Report;
use delaycert_cli::{cmd_analyze, cmd_phi, cmd_simulate, cmd_verify, exit, Overrides};
use delaycert_core::catalog::{Conclusion, VerdictSoundness};
use delaycert_core::dde_model::corpus::c3_period;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn corpus(dir: &TempDir, id: &str, extra: &str) -> PathBuf {
    write(dir, "cfg.toml", &format!("{extra}\n[equation]\ncorpus = \"{id}\"\n"))
}

fn read_csv(path: &Path) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x"));
    assert!(text.ends_with('\n'));
    lines
        .map(|l| {
            let (t, x) = l.split_once(',').unwrap();
            (t.parse().unwrap(), x.parse().unwrap())
        })
        .collect()
}

fn interpolate(rows: &[(f64, f64)], t: f64) -> f64 {
    let i = rows.partition_point(|r| r.0 <= t).clamp(1, rows.len() - 1);
    let ((t0, x0), (t1, x1)) = (rows[i - 1], rows[i]);
    x0 + (x1 - x0) * (t - t0) / (t1 - t0)
}

#[test]
fn analyze_c2_certifies_ues() {
    let dir = TempDir::new().unwrap();
    let cfg = corpus(&dir, "corpus:C2", "tests = \"all\"");
    let out = cmd_analyze(&cfg, &Overrides::default());
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let report = out.report.unwrap();
    assert_eq!(report.schema, 1);
    let th27 = report.verdicts.iter().find(|v| v.test_id == "TH2-7").unwrap();
    assert_eq!(th27.conclusion, Conclusion::Ues);
    assert_eq!(th27.soundness, VerdictSoundness::Sound);
    assert!(report.summary.certified_by.iter().any(|t| t == "TH2-7"));
}

#[test]
fn analyze_c3_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let out = cmd_analyze(&corpus(&dir, "corpus:C3", ""), &Overrides::default());
    assert_eq!(out.exit_code, exit::INCONCLUSIVE);
    let report = out.report.unwrap();
    assert!(report
        .verdicts
        .iter()
        .all(|v| v.soundness != VerdictSoundness::Sound || !v.conclusion.is_stability()));
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let negative = write(
        &dir,
        "neg.toml",
        "[equation]\nkind = \"linear\"\n[[equation.terms]]\ncoef = \"const(1)\"\nlag = \"const(-1)\"\n",
    );
    let out = cmd_analyze(&negative, &Overrides::default());
    assert_eq!(out.exit_code, exit::CONFIG_ERROR);
    assert!(out.error.unwrap().contains("equation.terms[0]: negative lag"));

    let unknown_field = write(&dir, "uf.toml", "[equation]\ncorpus = \"C2\"\ncolour = 3\n");
    let err = cmd_analyze(&unknown_field, &Overrides::default()).error.unwrap();
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("colour"), "{err}");

    let unknown_test = corpus(&dir, "C2", "tests = [\"TH99\"]");
    let out = cmd_analyze(&unknown_test, &Overrides::default());
    assert_eq!(out.exit_code, exit::CONFIG_ERROR);
    assert!(out.error.unwrap().contains("TH99"));

    let bad_expr = write(
        &dir,
        "expr.toml",
        "[equation]\nkind = \"linear\"\n[[equation.terms]]\ncoef = \"cosine(1)\"\nlag = \"const(1)\"\n",
    );
    let err = cmd_analyze(&bad_expr, &Overrides::default()).error.unwrap();
    assert!(err.contains("equation.terms[0].coef"), "{err}");

    let bad_step = corpus(&dir, "C2", "[solver]\nstep = -0.1");
    assert_eq!(cmd_simulate(&bad_step, &Overrides::default()).exit_code, exit::CONFIG_ERROR);
    let missing = dir.path().join("missing.toml");
    assert_eq!(cmd_analyze(&missing, &Overrides::default()).exit_code, exit::CONFIG_ERROR);
}

#[test]
fn inline_equation_matches_corpus() {
    let dir = TempDir::new().unwrap();
    let inline = write(
        &dir,
        "c1.toml",
        "[equation]\nkind = \"linear\"\nt0 = 0\n[[equation.terms]]\ncoef = \"const(1)\"\nlag = \"const(1)\"\nsign = \"plus\"\n",
    );
    let a = cmd_analyze(&inline, &Overrides::default()).report.unwrap();
    let b = cmd_analyze(&corpus(&dir, "corpus:C1(a=1,tau=1)", ""), &Overrides::default()).report.unwrap();
    assert_eq!(a.verdicts, b.verdicts);
}

#[test]
fn nonlinear_linearize_pipeline() {
    let dir = TempDir::new().unwrap();
    let cfg = corpus(&dir, "corpus:C5", "tests = [\"TH2-6\"]\n[options]\nomega = [1]");
    let out = cmd_analyze(&cfg, &Overrides::default());
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let g = out.report.unwrap().global.unwrap();
    assert_eq!(g.conclusion, Conclusion::Ges);
    assert!((g.margin - 0.25).abs() < 1e-9);

    let out = cmd_verify(&cfg, &Overrides { csv_dir: Some(dir.path().join("out")), ..Overrides::default() });
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let report = out.report.unwrap();
    assert_eq!(report.falsification.len(), 1);
    let f = &report.falsification[0];
    assert_eq!(f.trials.len(), 8);
    assert!(f.trials.iter().all(|t| t.passed && t.nu.unwrap() > 0.0));

    let not_capable = corpus(&dir, "corpus:C5", "tests = [\"TH6\"]");
    assert_eq!(cmd_analyze(&not_capable, &Overrides::default()).exit_code, exit::CONFIG_ERROR);
}

#[test]
fn inline_nonlinear_equation() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "mg.toml",
        r#"tests = ["TH2-6"]
[options]
omega = [1]
[equation]
kind = "nonlinear"
[[equation.terms]]
coef = "const(1)"
lag = "const(0.1)"
shape = "mackey_gain_low"
[[equation.terms]]
coef = "const(0.5)"
lag = "const(0.1)"
shape = "mackey_suppress"
"#,
    );
    let a = cmd_analyze(&cfg, &Overrides::default()).report.unwrap();
    let b = cmd_analyze(&corpus(&dir, "corpus:C5", "tests = [\"TH2-6\"]\n[options]\nomega = [1]"), &Overrides::default())
        .report
        .unwrap();
    assert_eq!(a.global, b.global);
}

#[test]
fn verify_c2_and_injected_c3() {
    let dir = TempDir::new().unwrap();
    let out = cmd_verify(&corpus(&dir, "corpus:C2", ""), &Overrides::default());
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let report = out.report.unwrap();
    assert!(!report.falsification.is_empty());
    assert_eq!(report.summary.falsification_violations, 0);

    let cfg = corpus(
        &dir,
        "corpus:C3",
        "[debug.inject_verdict]\ntest = \"TH2-7\"\nconclusion = \"UES\"\n[output]\ncsv_dir = \"violations\"",
    );
    // The table headers above end the top-level section, so move the
    // equation table in front of them.
    let text = std::fs::read_to_string(&cfg).unwrap();
    let (fixture, eq) = text.split_once("[equation]").unwrap();
    std::fs::write(&cfg, format!("[equation]{eq}{fixture}")).unwrap();
    let out = cmd_verify(&cfg, &Overrides::default());
    assert_eq!(out.exit_code, exit::FALSIFIED, "{:?}", out.error);
    let report = out.report.unwrap();
    assert!(report.summary.falsification_violations > 0);
    assert!(!report.csv_files.is_empty());
    for f in &report.csv_files {
        assert!(f.contains("violations"));
        let rows = read_csv(Path::new(f));
        assert!(rows.len() > 100);
    }
}

#[test]
fn simulate_c3_is_periodic() {
    let dir = TempDir::new().unwrap();
    let t = c3_period();
    let cfg = corpus(&dir, "corpus:C3", &format!("[solver]\nstep = 1e-4\nhorizon = {}", 10.0 * t + 1e-3));
    let out = cmd_simulate(&cfg, &Overrides { csv_dir: Some(dir.path().join("sim")), ..Overrides::default() });
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let rows = read_csv(&dir.path().join("sim/trajectory.csv"));
    for n in 1..=10 {
        let x = interpolate(&rows, n as f64 * t);
        assert!((x - 1.0).abs() < 1e-4, "x({n}T) = {x}");
    }
    assert!((interpolate(&rows, 1.0) - 0.683940).abs() < 1e-5);
}

#[test]
fn simulate_c1_decay_rate() {
    let dir = TempDir::new().unwrap();
    let out = cmd_simulate(&corpus(&dir, "corpus:C1(a=1,tau=1)", ""), &Overrides::default());
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let sim = out.report.unwrap().simulation.unwrap();
    let nu = sim.decay.unwrap().nu;
    assert!((nu - 0.3181).abs() < 0.03 * 0.3181, "nu = {nu}");
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn simulate_zero_equation_is_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "zero.toml",
        "[equation]\nkind = \"linear\"\n[[equation.terms]]\ncoef = \"const(0)\"\nlag = \"const(1)\"\n[solver]\nhorizon = 5\n",
    );
    let out = cmd_simulate(&cfg, &Overrides { initial: Some("const(2.5)".into()), ..Overrides::default() });
    assert_eq!(out.exit_code, exit::OK, "{:?}", out.error);
    let rows = read_csv(&dir.path().join("trajectory.csv"));
    assert!(rows.iter().all(|r| r.1 == 2.5));
}

#[test]
fn simulate_overflow_is_a_solver_error() {
    let dir = TempDir::new().unwrap();
    let cfg = corpus(&dir, "corpus:C1(a=-5,tau=1)", "[solver]\nhorizon = 400");
    let out = cmd_simulate(&cfg, &Overrides::default());
    assert_eq!(out.exit_code, exit::SOLVER_ERROR);
    assert!(out.error.unwrap().contains("overflow"));
}

#[test]
fn json_report_round_trips() {
    let dir = TempDir::new().unwrap();
    for id in ["corpus:C2", "corpus:C4", "corpus:C6"] {
        let out = cmd_analyze(&corpus(&dir, id, ""), &Overrides::default());
        let parsed = Report::from_json(&out.output).unwrap();
        assert_eq!(&parsed, out.report.as_ref().unwrap());
        assert_eq!(parsed.to_json(), out.output);
    }
    let out = cmd_verify(&corpus(&dir, "corpus:C5", "tests = [\"TH2-6\"]\n[options]\nomega = [1]"), &Overrides::default());
    let parsed = Report::from_json(&out.output).unwrap();
    assert_eq!(&parsed, out.report.as_ref().unwrap());
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = corpus(&dir, "corpus:C2", "");
    let strip = |s: &str| {
        let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
        v.as_object_mut().unwrap().remove("generated");
        serde_json::to_string(&v).unwrap()
    };
    let ov = Overrides { seed: Some(42), ..Overrides::default() };
    let a = cmd_verify(&cfg, &ov).output;
    let b = cmd_verify(&cfg, &ov).output;
    assert_eq!(strip(&a), strip(&b));
    let c = cmd_verify(&cfg, &Overrides { seed: Some(43), ..Overrides::default() }).output;
    assert_ne!(strip(&a), strip(&c));
}

#[test]
fn markdown_report() {
    let dir = TempDir::new().unwrap();
    let cfg = corpus(&dir, "corpus:C2", "");
    let md = cmd_analyze(&cfg, &Overrides { format: Some(delaycert_cli::config::Format::Markdown), ..Overrides::default() })
        .output;
    assert!(md.starts_with("# delaycert analyze report"));
    assert!(md.contains("| TH2-7 | yes | UES |"));
    assert!(md.contains("| hypothesis | lhs | rel | rhs | holds |"));
}

#[test]
fn phi_command() {
    let out = cmd_phi(None, Some(0.3), &Overrides::default());
    assert_eq!(out.exit_code, exit::OK);
    let v: f64 = out.output.trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-3);
    assert_eq!(cmd_phi(None, None, &Overrides::default()).exit_code, exit::CONFIG_ERROR);
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_delaycert");
    let c2 = write(&dir, "c2.toml", "[equation]\ncorpus = \"corpus:C2\"\n");
    let c3 = write(&dir, "c3.toml", "[equation]\ncorpus = \"corpus:C3\"\n");
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = run(&["analyze", c2.to_str().unwrap(), "--tests", "TH2-7,COR2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.verdicts.len(), 2);
    assert_eq!(run(&["analyze", c3.to_str().unwrap()]).status.code(), Some(3));
    let out = run(&["phi", "--tau", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = std::str::from_utf8(&out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-3);
    let csv = dir.path().join("csv");
    let out = run(&["simulate", c2.to_str().unwrap(), "--csv-dir", csv.to_str().unwrap(), "--initial", "const(1)"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(csv.join("trajectory.csv").exists());
    let out = run(&["analyze", dir.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
