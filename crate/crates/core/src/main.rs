use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(invsq::cli::run(std::env::args_os()))
}
