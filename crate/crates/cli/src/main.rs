use std::process::ExitCode;

use clap::Parser;
use uavsim_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.tag());
            ExitCode::from(e.exit_code())
        }
    }
}
