use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(aclbf::cli::run(std::env::args_os()))
}
