use std::process::ExitCode;

use qwalk_cli::{execute, parse_args, CliError};

fn main() -> ExitCode {
    let code = match parse_args(std::env::args_os()) {
        Ok(cfg) => execute(&cfg),
        Err(CliError::Info(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("qwalk: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
