use std::process::ExitCode;

fn main() -> ExitCode {
    synclora::cli::main()
}
