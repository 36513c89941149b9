use std::process::ExitCode;

use clap::Parser;
use granulate_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let result = RunConfig::from_cli(Cli::parse()).and_then(|config| run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(report) = e.report() {
                eprintln!("{report}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
