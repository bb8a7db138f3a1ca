use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = mediabar::cli::Cli::parse();
    ExitCode::from(mediabar::cli::execute(cli) as u8)
}
