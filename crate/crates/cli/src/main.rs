use clap::{Args, Parser, Subcommand};
use delaycert_cli::config::Format;
use delaycert_cli::{cmd_analyze, cmd_phi, cmd_simulate, cmd_verify, Outcome, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Stability certification for scalar linear and nonlinear delay equations.
#[derive(Parser)]
#[command(name = "delaycert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the stability tests and report their verdicts.
    Analyze(Common),
    /// Integrate the equation and export the trajectory as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial function expression, e.g. "const(1)".
        #[arg(long)]
        initial: Option<String>,
    },
    /// Analyse, then try to falsify every conclusive verdict by simulation.
    Verify(Common),
    /// Print the constant Phi(tau).
    Phi {
        config: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Path of the TOML configuration.
    config: PathBuf,
    /// "all" or a comma-separated list of test ids.
    #[arg(long)]
    tests: Option<String>,
    /// Seed for the falsification trials (overrides `solver.seed`)
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV output (overrides `output.csv_dir`)
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Report format (overrides `output.format`)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
}

impl Common {
    fn overrides(&self, initial: Option<String>) -> Overrides {
        Overrides {
            tests: self.tests.clone(),
            seed: self.seed,
            csv_dir: self.csv_dir.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Json => Format::Json,
                FormatArg::Markdown => Format::Markdown,
            }),
            initial,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Outcome = match cli.command {
        Command::Analyze(c) => cmd_analyze(&c.config, &c.overrides(None)),
        Command::Simulate { common, initial } => cmd_simulate(&common.config, &common.overrides(initial)),
        Command::Verify(c) => cmd_verify(&c.config, &c.overrides(None)),
        Command::Phi { config, tau } => cmd_phi(config.as_deref(), tau, &Overrides::default()),
    };
    print!("{}", outcome.output);
    if let Some(e) = &outcome.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(u8::try_from(outcome.exit_code).unwrap_or(1))
}
