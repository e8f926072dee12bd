use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use utiljudge::pipeline::{cmd_build, cmd_judge, cmd_qa, cmd_report, Backend, Outcome, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "utiljudge", version, about = "Build utility-judgment benchmarks, run judges and score answers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// http, mock:oracle, mock:noisy or mock:scripted.
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build candidate sets.
    Build,
    /// Run the judge grid over the candidate sets.
    Judge,
    /// Answer questions over each evidence source.
    Qa,
    /// Rebuild all tables from the output directory.
    Report,
}

fn finish<T>(outcome: Outcome<T>) -> ExitCode {
    print!("{}", outcome.table.to_text());
    for e in &outcome.errors {
        eprintln!("error: {e}");
    }
    if outcome.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let base = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let overrides = Overrides {
        seed: cli.seed,
        backend: cli.backend,
        out: cli.out.clone(),
    };
    let config = match base {
        Ok(c) => c.apply(&overrides),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Build => cmd_build(&config).map(finish),
        Command::Judge => cmd_judge(&config).map(finish),
        Command::Qa => cmd_qa(&config).map(finish),
        Command::Report => cmd_report(&config).map(|r| {
            print!("{r}");
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
