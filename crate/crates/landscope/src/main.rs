use std::process::ExitCode;

fn main() -> ExitCode {
    landscope::cli::run()
}
