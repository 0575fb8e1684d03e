use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use schottky_cli::{load_config, run, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Validate,
    Delta,
    Zeros,
    Scan,
    FactorCheck,
    Expander,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Validate => Subcommand::Validate,
            Command::Delta => Subcommand::Delta,
            Command::Zeros => Subcommand::Zeros,
            Command::Scan => Subcommand::Scan,
            Command::FactorCheck => Subcommand::FactorCheck,
            Command::Expander => Subcommand::Expander,
        }
    }
}

/// Resonances and spectral gaps of Schottky surfaces and their abelian covers.
#[derive(Debug, Parser)]
#[command(name = "schottky-gap", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// experiment config (TOML)
    #[arg(long)]
    config: PathBuf,

    /// override a config key, e.g. `--set numerics.degree=24`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let sub = Subcommand::from(args.command);
    let result = load_config(&args.config, &args.overrides).and_then(|c| run(sub, &c));
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record(sub.name()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
