use std::process::ExitCode;

use clap::Parser;
use idcode::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
