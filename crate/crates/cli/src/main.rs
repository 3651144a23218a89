use std::process::ExitCode;

use clap::Parser;
use tricomi_lab::config::Cli;

fn main() -> ExitCode {
    tricomi_lab::main_with(Cli::parse())
}
