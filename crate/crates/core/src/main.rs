use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use radbound::cli::Cli;
use radbound::report::{run, to_json, write_report};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let config = cli.command.into_config();
    let result = run(&config).and_then(|report| {
        match &config.output_path {
            Some(out) => write_report(&report, out)?,
            None => std::io::stdout().write_all(&to_json(&report)?)?,
        }
        Ok(report.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
