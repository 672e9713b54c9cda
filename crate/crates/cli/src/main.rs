use std::process::ExitCode;

use clap::Parser;
use projqaoa_cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
