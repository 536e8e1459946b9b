use std::process::ExitCode;

fn main() -> ExitCode {
    sdtransit::cli::main()
}
