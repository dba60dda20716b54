use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use kautz_cli::{caps, run, Cli, Outcome};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = std::env::var("KAUTZ_EDGE_CAP").ok();
    let outcome = match caps(env.as_deref(), cli.override_cap) {
        Ok(cap) => run(&cli.command, &cap),
        Err(e) => Outcome::from(e),
    };
    let mut stdout = std::io::stdout().lock();
    if stdout
        .write_all(outcome.stdout.as_bytes())
        .and_then(|()| stdout.flush())
        .is_err()
    {
        return ExitCode::from(2);
    }
    if let Some(message) = &outcome.message {
        eprintln!("kautz: {message}");
    }
    ExitCode::from(outcome.status.code())
}
