mod args;
mod commands;
mod error;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            _ => return fail(&clap_error(&e)),
        },
    };

    match run(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError {
                code: "THREAD_POOL",
                message: e.to_string(),
                usage: false,
            })?;
    }
    commands::dispatch(cli)
}

fn clap_error(e: &clap::Error) -> CliError {
    let message = match e.kind() {
        ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand | ErrorKind::MissingSubcommand => {
            "a subcommand is required; see `kappa --help`".to_string()
        }
        _ => {
            // first paragraph only; the usage block and help hint follow it
            let text = e.to_string();
            let head = text.split("\n\n").next().unwrap_or("invalid arguments");
            format!("{}; see `kappa --help`", head.trim_start_matches("error: ").trim_end_matches(':'))
        }
    };
    CliError::usage("USAGE", message)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code())
}
