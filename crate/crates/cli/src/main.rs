use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use stoprule_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(table) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(table.render(cli.format).as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
