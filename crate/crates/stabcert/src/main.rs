use std::process::ExitCode;

fn main() -> ExitCode {
    stabcert::cli::main_with(std::env::args_os())
}
