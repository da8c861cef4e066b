use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mesojj::cli::{parse_config, run, Command};
use mesojj::par::Execution;
use mesojj::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Solve the even and odd parity states.
    Solve,
    /// Extract junction parameters, ground state and qubit coefficients.
    Params,
    /// Sweep the separation length and fit the critical currents.
    Sweep,
    /// Integrate the two-mode equations of motion.
    Dynamics,
    /// Fit critical currents read from a sweep CSV.
    Fit,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Params => Command::Params,
            Cmd::Sweep => Command::Sweep,
            Cmd::Dynamics => Command::Dynamics,
            Cmd::Fit => Command::Fit,
        }
    }
}

/// Mesoscopic Josephson junction simulator.
///
/// Set MESOJJ_THREADS to a positive number to evaluate independent sweep
/// points in parallel.
#[derive(Debug, Parser)]
#[command(name = "mesojj", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// INI run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main_inner(args: Args) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::Config(format!("config file {} not found", args.config.display()))
        } else {
            Error::io(&args.config, e)
        }
    })?;
    let config = parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", args.config.display())),
        other => other,
    })?;
    let execution = Execution::from_env()?;
    let out = args.out.unwrap_or_else(|| config.output.directory.clone());
    let bundle = run(&config, args.command.into(), &out, execution)?;
    for file in &bundle.files {
        println!("{}", out.join(&file.path).display());
    }
    println!("{}", out.join("report.json").display());
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mesojj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
