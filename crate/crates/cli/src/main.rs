mod args;
mod commands;
mod error;
mod table;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Simulate => commands::simulate(common),
        Command::Stability => commands::stability(common),
        Command::Allocate { strong_tc, alpha_prime } => commands::allocate(common, *strong_tc, alpha_prime),
        Command::Sweep => commands::sweep(common),
        Command::Verify => commands::verify(common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|out| {
        let mut stdout = std::io::stdout().lock();
        table::emit(&out.artifacts, cli.common.format, cli.common.out.as_deref(), &mut stdout)?;
        Ok(out)
    });
    match outcome {
        Ok(out) => {
            for n in &out.notes {
                eprintln!("{n}");
            }
            match out.failure {
                Some(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
