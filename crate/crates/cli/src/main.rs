//! `qrf`: batch front end for the verification runs in `qrf-core`.
//!
//! Reports are JSON (pretty, trailing newline) and go to `--output` or stdout.
//! Exit codes: 0 all checks passed, 1 a verification failed, 2 malformed
//! input or I/O error, 3 the diamond-norm solver stopped at a bracket.
//! Anything other than 0 also prints a one-line JSON reason on stderr.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Failure;

#[derive(Debug, Parser)]
#[command(name = "qrf", version, about = "Quantum symmetry, catalysis and reference-frame checks")]
struct Cli {
    /// Run every batch on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Report destination; stdout when omitted. Written atomically.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Overrides the seed in the input file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the tolerance in the input file.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CatalysisArgs {
    /// Scenario file; required unless `--suite` is given.
    #[arg(long, required_unless_present = "suite", conflicts_with = "suite")]
    pub input: Option<PathBuf>,
    /// Generate and check this many scenarios instead.
    #[arg(long)]
    pub suite: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct RecoveryArgs {
    /// Frame scenario file; the phase-reference ladder is used when omitted.
    #[arg(long, conflicts_with_all = ["n", "theta"])]
    pub input: Option<PathBuf>,
    /// Ladder size of the phase reference.
    #[arg(long = "N", default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub theta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated ladder sizes.
    #[arg(long = "Ns", value_delimiter = ',', default_value = "2,4,8,16")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub theta: f64,
    /// Optional sampling configuration (`pure_samples`, `mixed_samples`, `seed`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// Random targets per group (finite-group demo only).
    #[arg(long, default_value_t = 20)]
    pub targets: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Covariance of a channel under a pair of symmetries.
    CheckCovariance(InputArgs),
    /// Word-trace comparison of two Hermitian tuples.
    WiegmannEquiv(InputArgs),
    /// Intertwiner on S for an exact-catalysis scenario.
    FindIntertwiner(InputArgs),
    /// Admissibility, intertwiner and correlation checks for a scenario or a generated batch.
    CatalysisVerify(CatalysisArgs),
    /// Back-action bound for one reference-frame scenario.
    RecoveryVerify(RecoveryArgs),
    /// Back-action bound across ladder sizes, as CSV.
    RefframeSweep(SweepArgs),
    /// The three-matrix example with pairwise but no joint equivalence.
    DemoAppendix(DemoArgs),
    /// Regular-representation and state-swap channels for ℤ₂ and S₃.
    DemoFiniteGroup(DemoArgs),
    /// Reference-frame commands.
    #[command(subcommand)]
    Refframe(Refframe),
}

#[derive(Debug, Subcommand)]
enum Refframe {
    /// Same as `refframe-sweep`.
    Sweep(SweepArgs),
    /// Same as `recovery-verify`.
    Verify(RecoveryArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return Failure::usage(e.to_string()).report(),
    };
    let exec = if cli.sequential {
        qrf_core::par::Exec::Sequential
    } else {
        qrf_core::par::Exec::default()
    };
    let result = match cli.command {
        Command::CheckCovariance(a) => commands::check_covariance(&a),
        Command::WiegmannEquiv(a) => commands::wiegmann_equiv(&a, exec),
        Command::FindIntertwiner(a) => commands::find_intertwiner(&a, exec),
        Command::CatalysisVerify(a) => commands::catalysis_verify(&a, exec),
        Command::RecoveryVerify(a) | Command::Refframe(Refframe::Verify(a)) => commands::recovery_verify(&a, exec),
        Command::RefframeSweep(a) | Command::Refframe(Refframe::Sweep(a)) => commands::refframe_sweep(&a, exec),
        Command::DemoAppendix(a) => commands::demo_appendix(&a, exec),
        Command::DemoFiniteGroup(a) => commands::demo_finite_group(&a),
    };
    match result {
        Ok(outcome) => outcome.finish(),
        Err(f) => f.report(),
    }
}
