use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let mut stdin = stdin.lock();
    let mut out = io::stdout();
    let mut err = io::stderr();
    let code = trachtenberg::interface::cli::run(std::env::args_os(), &mut stdin, &mut out, &mut err);
    let _ = out.flush();
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}
