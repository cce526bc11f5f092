use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(leray_cli::run(std::env::args_os()))
}
