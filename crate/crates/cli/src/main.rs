//! `stratiwave` — recover steady stratified water waves from crest-line
//! velocity data, generate reference waves, and check field files.
//!
//! ```text
//! stratiwave recover run.json --out results/
//! stratiwave forward newton.json --out wave/
//! stratiwave verify wave/recover.json results/field.csv --out check/
//! ```
//!
//! Exit codes: 0 success, 2 config or parse error, 3 stagnation or profile
//! error, 4 numerical failure, 5 a hard diagnostic failed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stratiwave::config::Config;
use stratiwave::error::Error;
use stratiwave::pipeline::{configure_threads, run_forward, run_recover, run_verify, Outcome};

#[derive(Parser)]
#[command(name = "stratiwave", version, about = "Steady stratified periodic water waves from crest-line data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the stream function, fields and surface from axis data.
    Recover {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a laminar, Newton-solved or manufactured reference wave.
    Forward {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the diagnostics on existing field, height or surface tables.
    Verify {
        config: PathBuf,
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    configure_threads()?;
    match cli.command {
        Command::Recover { config, out } => run_recover(&Config::load(&config)?, &out),
        Command::Forward { config, out } => run_forward(&Config::load(&config)?, &out),
        Command::Verify { config, tables, out } => run_verify(&Config::load(&config)?, &tables, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            let r = &outcome.report;
            for c in &r.checks {
                let status = if c.pass { "pass" } else if c.hard { "FAIL" } else { "warn" };
                eprintln!("{status:>4}  {:<40} {:.3e} (tol {:.1e})", c.name, c.value, c.tolerance);
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::from(r.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
