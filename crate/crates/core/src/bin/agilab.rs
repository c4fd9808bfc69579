use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use agilab::harness::{
    parallelism, run_experiment, with_parallelism, ExperimentConfig, ExperimentKind, OutputFormat,
    EXIT_ERROR, PARALLELISM_ENV,
};

#[derive(Parser)]
#[command(name = "agilab", version, about = "Distribution-indexed agent evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generality, tail generality, failure set and G1.
    Evaluate(Common),
    /// The full axiom bundle.
    Axioms(Common),
    /// Small-mass shift certificates.
    Fragility(Common),
    /// Worst-case distribution and TV-constrained adversary.
    WorstCase(Common),
    /// Perturbation counterexample and G5 across δ_rb.
    Robustness(Common),
    /// Exact mutual-information transfer bounds.
    Transfer(Common),
    /// Two-point indistinguishability experiment.
    Externality(Common),
    /// Pass and fail distributions for one agent.
    Relativity(Common),
    /// Runs the configured step experiment along a drift sequence.
    Drift(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Report,
    Tabular,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output path. Without either, prints to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = PARALLELISM_ENV)]
    parallelism: Option<usize>,
    #[arg(long, value_enum, default_value = "report")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Evaluate(a) => (ExperimentKind::Evaluate, a),
        Command::Axioms(a) => (ExperimentKind::Axioms, a),
        Command::Fragility(a) => (ExperimentKind::Fragility, a),
        Command::WorstCase(a) => (ExperimentKind::WorstCase, a),
        Command::Robustness(a) => (ExperimentKind::Robustness, a),
        Command::Transfer(a) => (ExperimentKind::Transfer, a),
        Command::Externality(a) => (ExperimentKind::Externality, a),
        Command::Relativity(a) => (ExperimentKind::Relativity, a),
        Command::Drift(a) => (ExperimentKind::Drift, a),
    };
    match run(kind, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn run(kind: ExperimentKind, args: Common) -> agilab::Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.kind = kind;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let format = match args.format {
        Format::Report => OutputFormat::Report,
        Format::Tabular => OutputFormat::Tabular,
    };
    let report = with_parallelism(parallelism(args.parallelism), || run_experiment(&cfg))??;
    let out = args.out.or_else(|| cfg.out.as_ref().map(PathBuf::from));
    match out {
        Some(p) => {
            report.write(&p, format)?;
            eprintln!("{} report written to {}", report.kind, p.display());
        }
        None => match format {
            OutputFormat::Report => println!("{}", report.to_json()),
            OutputFormat::Tabular => print!("{}", report.to_csv()?),
        },
    }
    if let Some(v) = report.verdict {
        eprintln!("verdict: {v}");
    }
    Ok(report.exit_code())
}
