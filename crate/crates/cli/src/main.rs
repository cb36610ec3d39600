use std::path::PathBuf;
use std::process::ExitCode;

use adrkit_cli::{commands, exit_code, Options};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "adrkit",
    version,
    about = "Adaptive Douglas-Rachford experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for `sweep`.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the parameter conditions and print κ̄.
    Validate,
    /// Iterate the splitting operator and write a trace.
    Run,
    /// Run a parameter grid.
    Sweep,
    /// Sample pairs to test a property of an operator or resolvent.
    Certify,
    /// Check trend premises on a recorded trace.
    DemiCheck,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Some(config) = cli.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let opts = Options {
        config,
        out: cli.out,
        seed: cli.seed,
        quiet: cli.quiet,
        jobs: cli.jobs,
    };
    let result = match cli.command {
        Command::Validate => commands::cmd_validate(&opts),
        Command::Run => commands::cmd_run(&opts),
        Command::Sweep => commands::cmd_sweep(&opts),
        Command::Certify => commands::cmd_certify(&opts),
        Command::DemiCheck => commands::cmd_demi_check(&opts),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
