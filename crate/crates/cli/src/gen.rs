//! `gen`: materialize one synthetic ensemble/surrogate pair as CSV files,
//! for exercising `validate` or external tools.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use nloi::io::write_matrix;
use nloi::simgen::{gen_pair, SimScenario};

use crate::util::{write_atomic, CliError};

#[derive(Args)]
pub struct GenArgs {
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Number of planted groups.
    #[arg(long)]
    k: usize,
    /// Fraction of nodes keeping their planted label in the surrogate.
    #[arg(long, default_value_t = 1.0)]
    signal: f64,
    /// Fraction of between-group ensemble entries zeroed.
    #[arg(long, default_value_t = 0.0)]
    sparsity: f64,
    /// Scenario seed; the pair is a pure function of the flags.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn write_labels(w: &mut dyn Write, labels: &[usize]) -> std::io::Result<()> {
    writeln!(w, "label")?;
    for l in labels {
        writeln!(w, "{l}")?;
    }
    Ok(())
}

pub fn run(args: GenArgs) -> Result<(), CliError> {
    let scenario = SimScenario::new(args.n, args.k, args.signal, args.sparsity, args.seed);
    let pair = gen_pair::<f64>(&scenario)?;

    let files = [
        ("ensemble.csv", &pair.ensemble),
        ("surrogate.csv", &pair.surrogate),
    ];
    for (name, matrix) in files {
        write_atomic(&args.out.join(name), |w| write_matrix(w, matrix))?;
    }
    write_atomic(&args.out.join("true_labels.csv"), |w| {
        write_labels(w, &pair.true_groups)
    })?;
    write_atomic(&args.out.join("surrogate_labels.csv"), |w| {
        write_labels(w, &pair.surrogate_groups)
    })?;

    println!(
        "Wrote ensemble.csv, surrogate.csv, true_labels.csv, surrogate_labels.csv to {}",
        args.out.display()
    );
    println!(
        "n = {}, k = {}, signal = {}, sparsity = {}, seed = {}",
        args.n, args.k, args.signal, args.sparsity, args.seed
    );
    Ok(())
}
