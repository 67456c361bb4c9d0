mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json_errors();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                eprintln!(
                    "{}",
                    serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } })
                );
            } else {
                eprintln!("error[{}]: {e}", e.code());
            }
            ExitCode::from(e.exit_status())
        }
    }
}

impl CliError {
    /// 1 validation/domain, 2 usage, 3 I/O.
    fn exit_status(&self) -> u8 {
        match self {
            CliError::Domain { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}
