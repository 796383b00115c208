use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    skipring::cli::main_with_args(skipring::cli::Args::parse())
}
