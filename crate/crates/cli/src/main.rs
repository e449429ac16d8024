mod args;
mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;
use commands::Failure;
use std::process::ExitCode;

fn report(failure: Failure) -> ExitCode {
    eprintln!("{}", failure.to_json());
    ExitCode::from(failure.code())
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let text = e.kind().as_str().map(str::to_owned).unwrap_or_default();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or("").trim_start_matches("error: ");
            let message = if first.is_empty() { text } else { first.to_owned() };
            return report(Failure::validation(message));
        }
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        return report(Failure::invariant(format!("thread pool: {e}")));
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => report(failure),
    }
}
