mod args;
mod commands;
mod error;
mod manifest;
mod settings;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use clarity_core::config::KvConfig;

use args::{Cli, Command};
use error::CliError;
use settings::Settings;

fn run(cli: Cli) -> Result<(), CliError> {
    let mut flags = KvConfig::new();
    if let Some(seed) = cli.seed {
        flags.set("seed", seed);
    }
    if let Command::Augment(a) = &cli.command {
        if let Some(m) = a.mode {
            flags.set("augment.mode", if m == args::AugmentMode::Partial { "partial" } else { "full-balance" });
        }
    }
    let settings = Settings::load(cli.config.as_deref(), flags)?;
    match &cli.command {
        Command::Prepare(a) => commands::prepare(a, &settings),
        Command::Augment(a) => commands::augment(a, &settings),
        Command::Train(a) => commands::train(a, &settings),
        Command::Predict(a) => commands::predict(a, &settings),
        Command::Evaluate(a) => commands::evaluate(a, &settings),
        Command::Baseline(a) => commands::baseline(a, &settings),
        Command::Report(a) => commands::report(a, &settings),
        Command::Grid(a) => commands::grid(a, &settings),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
