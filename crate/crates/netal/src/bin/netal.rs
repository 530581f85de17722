use std::process::ExitCode;

use clap::Parser;
use netal::cli::{configure_threads, dispatch, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netal: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
