use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use liftkit_cli::{run, RunConfig, EXIT_USAGE};

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let outcome = run(&config);
    if config.out.is_none() {
        let _ = std::io::stdout().write_all(outcome.text.as_bytes());
    }
    ExitCode::from(outcome.code as u8)
}
