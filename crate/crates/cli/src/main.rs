use std::io;
use std::process::ExitCode;

use clap::Parser;
use evsched_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let result = run(cli, &mut stdout.lock()).map_err(|e| {
        let code = e.exit_code();
        (anyhow::Error::new(e), code)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((err, code)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code as u8)
        }
    }
}
