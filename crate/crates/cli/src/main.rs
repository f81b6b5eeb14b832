//! `hscs`: learn dictionaries, build measurement matrices, balance sensing
//! matrices, reconstruct spectra, and run the comparison experiments.
//!
//! Exit status: 0 on success, 1 on validation errors (bad flags, bad
//! files, dimension mismatches), 2 on numerical failures.

mod commands;
mod scene;

use clap::Parser;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hscs", version, about = "Compressive sensing for hyperspectral spectra")]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; everything else is a
            // validation failure.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
