use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use sesame_core::cli::{main_with, Args, Status};

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Usage.into() } else { Status::Ok.into() };
        }
    };
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let status = match main_with(&args, &mut input, &mut out, &mut err) {
        Ok(s) => s,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Status::Ok,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            Status::Failure
        }
    };
    let _ = out.flush();
    status.into()
}
