use std::path::PathBuf;

use clap::{Parser, Subcommand};

use fasris::cli::{self, CommonArgs};

#[derive(Parser)]
#[command(
    name = "fasris",
    version,
    about = "Link-level Monte-Carlo simulator for fluid-antenna and RIS-assisted mmWave links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a standard figure: 2 (throughput against the port count)
    /// or 3 (throughput against the transmit power).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=3))]
        figure: u8,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the sweep grid from the configuration file.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fit the reference gain to the throughput anchor and save it.
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the built-in self checks against the reference scenario.
    Validate {
        /// Force the named check to fail, to exercise the failure path.
        #[arg(long, value_name = "CHECK")]
        inject_fault: Option<String>,
        /// Also write the report to this file.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() {
    let parsed = Cli::parse();
    let result = match &parsed.command {
        Command::Figure { figure, common } => cli::cmd_figure(*figure, common),
        Command::Sweep { common } => cli::cmd_sweep(common),
        Command::Calibrate { common } => cli::cmd_calibrate(common),
        Command::Validate { inject_fault, out } => {
            cli::cmd_validate(inject_fault.as_deref(), out.as_deref())
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
