mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::Config;
use error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = Config::from_options(cli.command, &cli.opts)?;
    match cli.command {
        Command::Static => commands::static_run::run(&cfg),
        Command::Floquet => commands::floquet::run(&cfg),
        Command::Trace => commands::trace::run(&cfg),
        Command::Scan => commands::scan::run(&cfg),
        Command::Verify => commands::verify::run(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
