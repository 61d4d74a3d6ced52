use std::process::ExitCode;

fn main() -> ExitCode {
    mlpr_cli::run_from(std::env::args_os())
}
