use std::process::ExitCode;

fn main() -> ExitCode {
    targetflow_cli::run(std::env::args_os())
}
