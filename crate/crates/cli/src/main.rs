use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use opphunt_cli::{run_command, Artifacts, Cli, CliError, Sub};

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Output {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Output {
                path: "stdout".into(),
                source,
            }),
    }
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = cli.effective_config()?;
    eprintln!("effective config:\n{}", cfg.echo());
    let Artifacts {
        primary,
        traces,
        exit_code,
    } = run_command(&cli.command(), &cfg)?;
    write(cli.out.as_deref(), &primary)?;
    if let (Sub::Simulate { traces: Some(path) }, Some(text)) = (&cli.command, traces) {
        write(Some(path), &text)?;
    }
    Ok(exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
