use std::process::ExitCode;

fn main() -> ExitCode {
    dampwave_cli::app::run(std::env::args_os())
}
