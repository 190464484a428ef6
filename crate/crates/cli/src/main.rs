use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use algebroid_cli::{cmd_check, cmd_describe, cmd_simulate, exit, load, Failure};

#[derive(Parser)]
#[command(name = "algebroid", version, about = "Mechanics on general algebroids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured identity checks at sample points.
    Check { config: PathBuf },
    /// Integrate the configured system with RK4 and write a CSV trajectory.
    Simulate {
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print anchors, brackets, the linear tensor and the equations of motion.
    Describe { config: PathBuf },
}

fn init_threads() {
    if let Some(n) = std::env::var("ALGEBROID_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Check { config } => {
            let report = cmd_check(&load(&config)?)?;
            print!("{report}");
            Ok(report.exit_code())
        }
        Command::Simulate { config, output } => {
            let out = cmd_simulate(&load(&config)?)?;
            match &output {
                Some(path) => std::fs::write(path, &out.csv).map_err(|e| {
                    Failure::Compute(algebroid_core::Error::Precondition(format!("cannot write {}: {e}", path.display())))
                })?,
                None => print!("{}", out.csv),
            }
            eprint!("{}", out.report);
            if let Some(e) = &out.error {
                eprintln!("error: integration stopped: {e}");
            }
            Ok(out.exit_code())
        }
        Command::Describe { config } => {
            print!("{}", cmd_describe(&load(&config)?)?);
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
