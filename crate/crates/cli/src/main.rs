use std::io::Write;
use std::process::ExitCode;

use autobid_cli::args::Cli;
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    let report = match autobid_cli::run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let written = match &output {
        Some(path) => std::fs::write(path, &report.text),
        None => std::io::stdout().write_all(report.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    if report.claim_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
