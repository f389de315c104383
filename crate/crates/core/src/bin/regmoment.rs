use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use regmoment::scenarios::{run_scenario, Config};

#[derive(Parser)]
#[command(
    name = "regmoment",
    version,
    about = "Grad and regularized moment solver for Boltzmann-BGK"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a key = value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Overrides `threads` from the config.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config, then print its canonical form.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn execute(cmd: Command) -> regmoment::Result<()> {
    match cmd {
        Command::Run {
            config,
            output_dir,
            threads,
        } => {
            let mut c = Config::from_file(&config)?;
            if let Some(dir) = output_dir {
                c.output_dir = dir;
            }
            if let Some(t) = threads {
                c.run.threads = t;
            }
            c.validate()?;
            let report = run_scenario(&c)?;
            let last = report.records.last().expect("at least one snapshot");
            println!(
                "{} snapshots, t = {}, {} steps, mass drift {:e}, manifest {}",
                report.records.len(),
                last.time,
                last.step,
                report.mass_drift(),
                report.manifest.display()
            );
            Ok(())
        }
        Command::Check { config } => {
            let c = Config::from_file(&config)?;
            print!("{}", c.echo());
            Ok(())
        }
    }
}
