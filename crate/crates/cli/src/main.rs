use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(videstep_cli::run(std::env::args_os()))
}
