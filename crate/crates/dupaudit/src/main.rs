use std::process::ExitCode;

fn main() -> ExitCode {
    dupaudit::cli::run()
}
