use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(clockmin::cli::run(std::env::args_os(), &mut std::io::stdout()))
}
