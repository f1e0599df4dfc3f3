use std::process::ExitCode;

fn main() -> ExitCode {
    bubble_core::cli::init_logging();
    ExitCode::from(bubble_core::cli::main_with_args(std::env::args_os()).code())
}
