mod args;
mod commands;
mod inputs;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Invalid;

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by itself
    let cli = Cli::parse();
    let run = || -> anyhow::Result<bool> {
        commands::configure_threads()?;
        match &cli.command {
            Command::Build(a) => commands::cmd_build(a),
            Command::Certify(a) => commands::cmd_certify(a),
            Command::Sweep(a) => commands::cmd_sweep(a),
        }
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<Invalid>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
