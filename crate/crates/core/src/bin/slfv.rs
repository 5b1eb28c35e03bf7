use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slfv::runner::{load_config, run_experiment};
use slfv::SlfvError;

#[derive(Parser)]
#[command(name = "slfv", version, about = "Run spatial Lambda-Fleming-Viot experiments from a JSON config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward allele-frequency field.
    Forward(Common),
    /// Branching-coalescing dual.
    Dual(Common),
    /// Forward and dual estimates of the duality identity.
    DualityCheck(Common),
    /// Scaling exponents and constants for a list of n.
    ScalingTable(Common),
    /// Kernel and symbol tables.
    Kernel(Common),
    /// Deterministic limit equation.
    Pde(Common),
    /// Stochastic limit equation in one dimension.
    Spde(Common),
    /// Branching Brownian or stable particles with local-time coalescence.
    LimitDual(Common),
    /// Lineage, quadratic-variation and averaging-gap diagnostics.
    Diagnostics(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the base seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the output directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if any attached check fails.
    #[arg(long)]
    check: bool,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Forward(c) => ("forward", c),
            Command::Dual(c) => ("dual", c),
            Command::DualityCheck(c) => ("duality", c),
            Command::ScalingTable(c) => ("scaling-table", c),
            Command::Kernel(c) => ("kernel", c),
            Command::Pde(c) => ("pde", c),
            Command::Spde(c) => ("spde", c),
            Command::LimitDual(c) => ("limit-dual", c),
            Command::Diagnostics(c) => ("diagnostics", c),
        }
    }
}

fn is_config_error(e: &SlfvError) -> bool {
    !matches!(e, SlfvError::Io(_))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SLFV_LOG", "warn")).init();
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    let config = match load_config(&args.config, args.seed, args.out.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    if config.experiment.name() != kind {
        eprintln!(
            "{}: config describes a {} experiment, not {kind}",
            args.config.display(),
            config.experiment.name()
        );
        return ExitCode::from(2);
    }
    let outcome = match run_experiment(&config, args.jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if is_config_error(&e) { 2 } else { 1 });
        }
    };
    for c in &outcome.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} files to {}", outcome.manifest.files.len(), outcome.dir.display());
    if args.check && !outcome.passed() {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
