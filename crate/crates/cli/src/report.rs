//! Machine-readable (JSON) and human-readable (Markdown) reports.

use delaycert_core::catalog::{Conclusion, Verdict};
use delaycert_core::dde_model::Equation;
use delaycert_core::linearize::RatioRange;
use delaycert_core::solver::{DecayFit, FalsificationReport};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub equation_id: String,
    pub equation: Equation,
    /// Requested test ids; empty when every applicable test was run.
    pub tests: Vec<String>,
    pub verdicts: Vec<Verdict>,
    /// Global verdict of a nonlinear equation, obtained by linearisation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ratio_ranges: Vec<RatioRange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub falsification: Vec<FalsificationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub csv_files: Vec<String>,
    pub summary: Summary,
    /// Run-specific data (wall-clock time); excluded from reproducibility
    /// comparisons.
    pub generated: Generated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub exit_code: i32,
    pub status: String,
    /// Strongest conclusion backed by sound bounds.
    pub strongest_sound: Option<Conclusion>,
    /// Tests whose sound verdict asserts stability.
    pub certified_by: Vec<String>,
    #[serde(default)]
    pub falsification_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub initial: String,
    pub step: f64,
    pub horizon: f64,
    pub points: usize,
    pub max_abs: f64,
    pub final_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generated {
    pub unix_time: u64,
    pub tool_version: String,
}

impl Generated {
    pub fn now() -> Generated {
        let unix_time = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Generated { unix_time, tool_version: env!("CARGO_PKG_VERSION").to_string() }
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Report> {
        serde_json::from_str(s)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# delaycert {} report\n", self.command);
        let _ = writeln!(out, "- equation: `{}`", self.equation_id);
        let _ = writeln!(out, "- status: **{}** (exit {})", self.summary.status, self.summary.exit_code);
        if let Some(c) = self.summary.strongest_sound {
            let _ = writeln!(out, "- strongest sound conclusion: {c}");
        }
        if !self.summary.certified_by.is_empty() {
            let _ = writeln!(out, "- certified by: {}", self.summary.certified_by.join(", "));
        }
        out.push('\n');
        if let Some(g) = &self.global {
            out.push_str("## Global verdict\n\n");
            verdict_section(&mut out, g);
        }
        if !self.ratio_ranges.is_empty() {
            out.push_str("## Ratio ranges\n\n| term | lo | hi | values |\n|---|---|---|---|\n");
            for r in &self.ratio_ranges {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | [{}, {}] |",
                    r.term + 1,
                    num(r.lo),
                    num(r.hi),
                    num(r.validity.0),
                    num(r.validity.1)
                );
            }
            out.push('\n');
        }
        if !self.verdicts.is_empty() {
            out.push_str("## Verdicts\n\n| test | applicable | conclusion | margin | soundness |\n|---|---|---|---|---|\n");
            for v in &self.verdicts {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:?} |",
                    v.test_id,
                    if v.applicable { "yes" } else { "no" },
                    v.conclusion,
                    num(v.margin),
                    v.soundness
                );
            }
            out.push('\n');
            for v in self.verdicts.iter().filter(|v| v.applicable) {
                let _ = writeln!(out, "### {}\n", v.test_id);
                verdict_section(&mut out, v);
            }
        }
        if let Some(s) = &self.simulation {
            out.push_str("## Simulation\n\n");
            let _ = writeln!(out, "- initial function: `{}`", s.initial);
            let _ = writeln!(out, "- step {}, horizon {}, {} points", num(s.step), num(s.horizon), s.points);
            let _ = writeln!(out, "- max |x| = {}, final x = {}", num(s.max_abs), num(s.final_value));
            if let Some(d) = &s.decay {
                let _ = writeln!(out, "- fitted decay: nu = {}, M = {}", num(d.nu), num(d.m));
            }
            if let Some(e) = &s.decay_error {
                let _ = writeln!(out, "- decay fit unavailable: {e}");
            }
            out.push('\n');
        }
        if !self.falsification.is_empty() {
            out.push_str("## Falsification\n\n| test | conclusion | trials | violations |\n|---|---|---|---|\n");
            for f in &self.falsification {
                let _ = writeln!(out, "| {} | {} | {} | {} |", f.test_id, f.conclusion, f.trials.len(), f.violations);
            }
            out.push('\n');
        }
        if !self.csv_files.is_empty() {
            out.push_str("## CSV files\n\n");
            for f in &self.csv_files {
                let _ = writeln!(out, "- `{f}`");
            }
            out.push('\n');
        }
        out
    }
}

fn verdict_section(out: &mut String, v: &Verdict) {
    let _ = writeln!(out, "{} — {} (margin {}, {:?})\n", v.test_id, v.conclusion, num(v.margin), v.soundness);
    if !v.hypothesis_checks.is_empty() {
        out.push_str("| hypothesis | lhs | rel | rhs | holds |\n|---|---|---|---|---|\n");
        for c in &v.hypothesis_checks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                c.name,
                num(c.lhs),
                c.relation.symbol(),
                num(c.rhs),
                if c.satisfied { "yes" } else { "no" }
            );
        }
        out.push('\n');
    }
    for a in &v.alternatives {
        let state = if !a.applicable {
            "not applicable"
        } else if a.satisfied {
            "holds"
        } else {
            "fails"
        };
        let _ = writeln!(out, "- alternative {}: {state} (margin {})", a.label, num(a.margin));
    }
    for n in &v.notes {
        let _ = writeln!(out, "- note: {n}");
    }
    out.push('\n');
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        format!("{x}")
    }
}
