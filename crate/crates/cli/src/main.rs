mod args;
mod manifest;
mod plot;
mod run;

use std::process::ExitCode;

use clap::Parser;

/// Exit status 2 for numerical failures, 1 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    let solver = e
        .chain()
        .filter_map(|c| c.downcast_ref::<ventsim_core::Error>())
        .any(ventsim_core::Error::is_solver_failure);
    if solver {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run::execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
