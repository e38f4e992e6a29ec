use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kakeya_lab::{run, write_outputs, ExperimentConfig, Params, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "kakeya-lab", version, about = "Desk-scale Kakeya experiments over F_q((t))")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with parameters; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand)]
enum Command {
    /// Lubin–Tate commutation, residues, orbit structure and the Newton check.
    LtSelftest(RunArgs),
    /// Counting-lemma oracle: exhaustive univariate sweep and random batches.
    SzVerify(RunArgs),
    /// Covering bound on a point set (input file or greedy Kakeya set).
    Covering(RunArgs),
    /// Exhaustive minimum Kakeya set on a tiny space.
    MinKakeya(RunArgs),
    /// Distributional estimate for the maximal function (CSV rows per λ).
    MaximalDist(RunArgs),
    /// Norm estimate for the maximal function (CSV rows per k).
    MaximalNorm(RunArgs),
    /// Step-by-step run of the polynomial-method argument.
    ProofTrace(RunArgs),
    /// Re-check a stored proof trace.
    Replay(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::LtSelftest(a) => ("lt-selftest", a),
        Command::SzVerify(a) => ("sz-verify", a),
        Command::Covering(a) => ("covering", a),
        Command::MinKakeya(a) => ("min-kakeya", a),
        Command::MaximalDist(a) => ("maximal-dist", a),
        Command::MaximalNorm(a) => ("maximal-norm", a),
        Command::ProofTrace(a) => ("proof-trace", a),
        Command::Replay(a) => ("replay", a),
    };
    let file = match args.config.as_deref().map(Params::from_toml_file).transpose() {
        Ok(p) => p.unwrap_or_default(),
        Err(e) => {
            eprintln!("kakeya-lab: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let cfg = match ExperimentConfig::resolve(name, file.overlay(&args.params)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kakeya-lab: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let outcome = run(&cfg);
    if let Some(err) = &outcome.report.error {
        eprintln!("kakeya-lab: {err}");
    }
    for v in &outcome.report.violations {
        eprintln!("kakeya-lab: {v}");
    }
    if let Err(e) = write_outputs(&outcome) {
        eprintln!("kakeya-lab: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
