use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use epistemic_cli::{emit, execute, Cli, EXIT_CONFIG};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG as u8),
            };
        }
    };
    let out = match execute(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Err(e) = emit(&cli, &out) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    eprintln!("{}", out.summary);
    ExitCode::from(out.exit_code as u8)
}
