use std::process::ExitCode;

use clap::Parser;
use zipfkit_cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zipfkit: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
