use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regenrad_cli::{run, ExperimentConfig, ExperimentKind, Violations};

#[derive(Parser)]
#[command(name = "regenrad", version, about = "Regenerative Markov chain experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a chain, optionally with regeneration flags.
    Simulate(Flags),
    /// Split a trajectory into regeneration blocks.
    Blocks(Flags),
    /// Estimate block Rademacher complexities.
    Rademacher(Flags),
    /// Evaluate the complexity bounds, or compare them with simulation.
    Bounds(Flags),
    /// Kernel density estimation error rate.
    KdeRate(Flags),
    /// Metropolis-Hastings credible-interval error rate.
    MhCredible(Flags),
    /// Randomized checks of the covering-number comparisons.
    VerifyLemmas(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replications.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(kind: ExperimentKind, flags: Flags) -> anyhow::Result<i32> {
    if let Some(jobs) = flags.jobs {
        anyhow::ensure!(jobs >= 1, "--jobs must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let mut cfg = ExperimentConfig::load(&flags.config)?;
    match cfg.kind {
        None => cfg.kind = Some(kind),
        Some(k) if k != kind => anyhow::bail!("configuration is for {k}, not {kind}"),
        Some(_) => {}
    }
    if flags.seed.is_some() {
        cfg.seed = flags.seed;
    }
    if let Some(out) = flags.out {
        cfg.output.get_or_insert_with(Default::default).dir = Some(out.display().to_string());
    }
    let report = run(&cfg)?;
    println!("{}", report.manifest.summary);
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (kind, flags) = match cli.command {
        Command::Simulate(f) => (ExperimentKind::Simulate, f),
        Command::Blocks(f) => (ExperimentKind::Blocks, f),
        Command::Rademacher(f) => (ExperimentKind::Rademacher, f),
        Command::Bounds(f) => (ExperimentKind::Bounds, f),
        Command::KdeRate(f) => (ExperimentKind::KdeRate, f),
        Command::MhCredible(f) => (ExperimentKind::MhCredible, f),
        Command::VerifyLemmas(f) => (ExperimentKind::VerifyLemmas, f),
    };
    match execute(kind, flags) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            match e.downcast_ref::<Violations>() {
                Some(v) => eprint!("error: {v}"),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::from(1)
        }
    }
}
