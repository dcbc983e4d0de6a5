use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let inv = phiprod_cli::commands::invoke(std::env::args_os());
    // A closed pipe on stdout is not an error worth reporting.
    let _ = std::io::stdout().write_all(inv.stdout.as_bytes());
    let _ = std::io::stderr().write_all(inv.stderr.as_bytes());
    ExitCode::from(inv.code)
}
