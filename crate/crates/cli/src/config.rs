//! Declarative analysis configuration (TOML).
//!
//! ```toml
//! tests = "all"                 # or ["TH2-7", "TH20"]
//!
//! [equation]
//! corpus = "corpus:C2"          # or an inline equation:
//! # kind = "linear"             # linear | nonlinear
//! # t0 = 0.0
//! # [[equation.terms]]
//! # coef = "sinusoid(0, 1, 2, 0)"
//! # lag = "const(0.2)"
//! # sign = "plus"               # plus | minus
//! # shape = "one"               # nonlinear only
//!
//! [solver]
//! step = 0.01
//! horizon = 60.0
//! seed = 1234
//! trials = 8
//!
//! [output]
//! format = "json"               # json | markdown
//! csv_dir = "out"
//! ```

use anyhow::{anyhow, bail, Context, Result};
use delaycert_core::catalog::{test_info, OmegaMode, RunOptions};
use delaycert_core::dde_model::{
    corpus, validate, DelaySpec, Equation, LinearDDE, LinearTerm, NonlinearDDE, NonlinearTerm,
    RatioShape, SignTag,
};
use delaycert_core::funcmodel::{ScanConfig, TimeFunction};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub equation: EquationSpec,
    #[serde(default)]
    pub tests: TestSelection,
    #[serde(default)]
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub options: OptionsSpec,
    #[serde(default)]
    pub linearize: LinearizeSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub debug: DebugSpec,
}

/// Either a corpus reference or an inline equation.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub corpus: Option<String>,
    pub kind: Option<EquationKind>,
    pub t0: Option<f64>,
    #[serde(default)]
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    Linear,
    Nonlinear,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coef: String,
    pub lag: String,
    /// Declared upper bound of the lag; inferred from the expression if absent.
    pub lag_bound: Option<f64>,
    #[serde(default = "default_sign")]
    pub sign: SignTag,
    #[serde(default)]
    pub shape: ShapeName,
    pub table: Option<TableSpec>,
}

fn default_sign() -> SignTag {
    SignTag::Plus
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    #[default]
    One,
    MackeyGainLow,
    MackeySuppress,
    Table,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

/// `"all"` or an explicit list of test ids.
#[derive(Clone, Debug, PartialEq, Default, Deserialize)]
#[serde(try_from = "TestSelectionRaw")]
pub enum TestSelection {
    #[default]
    All,
    List(Vec<String>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TestSelectionRaw {
    Word(String),
    List(Vec<String>),
}

impl TryFrom<TestSelectionRaw> for TestSelection {
    type Error = String;

    fn try_from(raw: TestSelectionRaw) -> Result<Self, String> {
        match raw {
            TestSelectionRaw::Word(w) if w == "all" => Ok(TestSelection::All),
            TestSelectionRaw::Word(w) => Err(format!("expected \"all\" or a list of test ids, got \"{w}\"")),
            TestSelectionRaw::List(v) => Ok(TestSelection::List(v)),
        }
    }
}

impl TestSelection {
    /// Parses the `--tests` flag: `all` or a comma-separated list.
    pub fn from_flag(s: &str) -> TestSelection {
        if s.trim() == "all" {
            TestSelection::All
        } else {
            TestSelection::List(
                s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect(),
            )
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// Start of the scan window relative to `t0`.
    #[serde(rename = "T_scan")]
    pub t_scan: f64,
    #[serde(rename = "W")]
    pub width: f64,
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Markdown,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    pub csv_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    /// Index set for the a-priori tests, 1-based.
    pub omega: Option<Vec<usize>>,
    /// Shift parameter for the shifted-boundedness test.
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearizeSpec {
    /// Solution value range `[A, B]` over which the ratios are enclosed;
    /// the whole line by default.
    pub bounds: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    /// Initial function expression; `const(1)` by default.
    pub initial: Option<String>,
}

/// Test fixtures; never set in production configurations.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebugSpec {
    pub inject_verdict: Option<InjectSpec>,
}

/// Overrides the conclusion of one test after analysis.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectSpec {
    pub test: String,
    pub conclusion: delaycert_core::catalog::Conclusion,
}

/// A configuration with its equation resolved and checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: AnalysisConfig,
    pub equation: Equation,
    pub equation_id: String,
    /// Test ids to run; empty means "all".
    pub tests: Vec<String>,
    /// Directory that relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl AnalysisConfig {
    /// Parses TOML text; syntax and schema errors carry line/column context.
    pub fn parse(text: &str) -> Result<AnalysisConfig> {
        toml::from_str(text).map_err(|e| anyhow!("invalid configuration: {e}"))
    }

    pub fn load(path: &Path) -> Result<AnalysisConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read configuration {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Builds the equation and checks the semantic invariants.
    pub fn resolve(self, base_dir: &Path) -> Result<Resolved> {
        let (equation, equation_id) = self.equation.build()?;
        let report = validate(&equation);
        if !report.is_valid() {
            let msgs: Vec<String> = report
                .issues
                .iter()
                .map(|i| match i.term {
                    Some(j) => format!("equation.terms[{j}]: {}", i.message),
                    None => format!("equation: {}", i.message),
                })
                .collect();
            bail!("invalid equation: {}", msgs.join("; "));
        }
        let tests = match &self.tests {
            TestSelection::All => Vec::new(),
            TestSelection::List(ids) => {
                if ids.is_empty() {
                    bail!("tests: empty test list");
                }
                for id in ids {
                    if test_info(id).is_none() {
                        bail!("tests: unknown test id '{id}'");
                    }
                }
                ids.clone()
            }
        };
        self.check_numbers()?;
        Ok(Resolved { config: self, equation, equation_id, tests, base_dir: base_dir.to_path_buf() })
    }

    fn check_numbers(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => bail!("{name} must be positive and finite, got {x}"),
                _ => Ok(()),
            }
        };
        positive("solver.step", self.solver.step)?;
        positive("solver.horizon", self.solver.horizon)?;
        if self.solver.trials == Some(0) {
            bail!("solver.trials must be at least 1");
        }
        if let Some(scan) = &self.scan {
            positive("scan.W", Some(scan.width))?;
            positive("scan.step", scan.step)?;
            if !(scan.t_scan >= 0.0 && scan.t_scan.is_finite()) {
                bail!("scan.T_scan must be finite and nonnegative, got {}", scan.t_scan);
            }
        }
        if let Some(omega) = &self.options.omega {
            if omega.is_empty() || omega.contains(&0) {
                bail!("options.omega must be a nonempty list of 1-based term indices");
            }
        }
        if let Some([a, b]) = self.linearize.bounds {
            if !(a <= b) {
                bail!("linearize.bounds: empty interval [{a}, {b}]");
            }
        }
        Ok(())
    }
}

impl EquationSpec {
    fn build(&self) -> Result<(Equation, String)> {
        if let Some(id) = &self.corpus {
            if self.kind.is_some() || self.t0.is_some() || !self.terms.is_empty() {
                bail!("equation: 'corpus' cannot be combined with an inline equation");
            }
            let eq = corpus::lookup(id).map_err(|e| anyhow!("equation.corpus: {e}"))?;
            let name = id.trim();
            let name = if name.starts_with("corpus:") { name.to_string() } else { format!("corpus:{name}") };
            return Ok((eq, name));
        }
        let kind = self.kind.ok_or_else(|| anyhow!("equation: expected 'corpus' or 'kind'"))?;
        let t0 = self.t0.unwrap_or(0.0);
        if !t0.is_finite() {
            bail!("equation.t0 must be finite");
        }
        if self.terms.is_empty() {
            bail!("equation.terms: at least one term is required");
        }
        let eq = match kind {
            EquationKind::Linear => {
                let mut terms = Vec::new();
                for (j, t) in self.terms.iter().enumerate() {
                    if t.shape != ShapeName::One || t.table.is_some() {
                        bail!("equation.terms[{j}]: ratio shapes require kind = \"nonlinear\"");
                    }
                    let (coef, delay) = t.parts(j)?;
                    terms.push(LinearTerm::new(coef, delay, t.sign));
                }
                Equation::Linear(LinearDDE::new(t0, terms))
            }
            EquationKind::Nonlinear => {
                let mut terms = Vec::new();
                for (j, t) in self.terms.iter().enumerate() {
                    let (coef, delay) = t.parts(j)?;
                    let coef = match t.sign {
                        SignTag::Plus => coef,
                        SignTag::Minus => TimeFunction::scaled(-1.0, coef),
                    };
                    terms.push(NonlinearTerm { coef, delay, ratio: t.ratio(j)? });
                }
                Equation::Nonlinear(NonlinearDDE { t0, terms })
            }
        };
        Ok((eq, "inline".to_string()))
    }
}

impl TermSpec {
    fn parts(&self, j: usize) -> Result<(TimeFunction, DelaySpec)> {
        let coef = TimeFunction::parse(&self.coef)
            .map_err(|e| anyhow!("equation.terms[{j}].coef: {e}"))?;
        let lag = TimeFunction::parse(&self.lag).map_err(|e| anyhow!("equation.terms[{j}].lag: {e}"))?;
        let delay = match self.lag_bound {
            Some(b) => DelaySpec::with_bound(lag, b),
            None => match lag.simplified().as_constant() {
                Some(c) => DelaySpec::constant(c),
                None => DelaySpec::new(lag),
            },
        };
        Ok((coef, delay))
    }

    fn ratio(&self, j: usize) -> Result<RatioShape> {
        if self.shape != ShapeName::Table && self.table.is_some() {
            bail!("equation.terms[{j}].table is only allowed with shape = \"table\"");
        }
        Ok(match self.shape {
            ShapeName::One => RatioShape::One,
            ShapeName::MackeyGainLow => RatioShape::MackeyGainLow,
            ShapeName::MackeySuppress => RatioShape::MackeySuppress,
            ShapeName::Table => {
                let t = self
                    .table
                    .as_ref()
                    .ok_or_else(|| anyhow!("equation.terms[{j}]: shape = \"table\" needs a 'table'"))?;
                if !(t.step > 0.0) || t.values.len() < 2 || t.values.iter().any(|v| !v.is_finite()) {
                    bail!("equation.terms[{j}].table: need a positive step and at least two finite values");
                }
                RatioShape::UserTabulated { u_start: t.start, u_step: t.step, values: t.values.clone() }
            }
        })
    }
}

impl Resolved {
    pub fn run_options(&self) -> RunOptions {
        let mut opts = RunOptions::default();
        if let Some(omega) = &self.config.options.omega {
            opts.omega = OmegaMode::Subset(omega.iter().map(|k| k - 1).collect());
        }
        opts.lambda = self.config.options.lambda;
        if let Some(scan) = &self.config.scan {
            opts.scan = Some(ScanConfig { offset: scan.t_scan, width: scan.width, step: scan.step });
        }
        opts
    }

    /// CSV output directory from the configuration, relative to the
    /// configuration file.
    pub fn csv_dir(&self) -> PathBuf {
        let dir = self.config.output.csv_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        if dir.is_absolute() {
            dir
        } else {
            self.base_dir.join(dir)
        }
    }
}
