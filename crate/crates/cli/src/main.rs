//! Command-line front end: validates a supplied matrix pair against the
//! agreement measures, runs the stock simulation studies, and emits
//! synthetic pairs for testing.
//!
//! Exit codes: 0 on success, 2 for validation problems (malformed input
//! files, inconsistent dimensions, bad flag values), 1 for I/O failures
//! (missing files, unwritable outputs). Output files are written to a
//! temporary sibling and renamed into place, so failures never leave
//! partial files behind.

mod gen;
mod simulate;
mod util;
mod validate;

use clap::{Parser, Subcommand};



#[derive(Parser)]
#[command(
    name = "nloi",
    version,
    about = "Agreement between a fuzzy co-occurrence matrix and a crisp surrogate",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test agreement between an ensemble matrix and a surrogate.
    Validate(validate::ValidateArgs),
    /// Run a simulation study over a parameter grid.
    Simulate(simulate::SimulateArgs),
    /// Generate a synthetic ensemble/surrogate pair as CSV files.
    Gen(gen::GenArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(args) => validate::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Gen(args) => gen::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
