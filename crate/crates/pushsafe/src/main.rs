use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(pushsafe::cli::run(std::env::args_os()) as u8)
}
