use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(mixdiff::cli::run(std::env::args_os()))
}
