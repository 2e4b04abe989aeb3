use std::process::ExitCode;

use clap::Parser;
use vnag_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("vnag: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
