use std::process::ExitCode;

fn main() -> ExitCode {
    shortfall_hedge::cli::main_with_args(std::env::args_os())
}
