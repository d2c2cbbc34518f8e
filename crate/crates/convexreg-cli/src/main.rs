use clap::{Parser, Subcommand};
use convexreg_cli::commands::{
    run_band, run_fit, run_replay, run_simulate, BandArgs, FitArgs, ReplayArgs, SimulateArgs,
};
use convexreg_cli::{configure_threads, CliError};

/// Shape-constrained regression: smooth, then convexify.
#[derive(Parser)]
#[command(name = "convexreg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a convex or concave regression to a CSV dataset.
    Fit(FitArgs),
    /// Uniform confidence band around the (convexified) kernel estimate.
    Band(BandArgs),
    /// Reproduce a simulation study's figure data as CSV files.
    Simulate(SimulateArgs),
    /// Re-run a command from its run_manifest.json.
    Replay(ReplayArgs),
}

fn main() {
    configure_threads();
    let cli = Cli::parse();
    let result: Result<_, CliError> = match &cli.command {
        Command::Fit(args) => run_fit(args),
        Command::Band(args) => run_band(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Replay(args) => run_replay(args),
    };
    if let Err(err) = result {
        eprintln!("{}", err.render());
        std::process::exit(err.exit_code());
    }
}
