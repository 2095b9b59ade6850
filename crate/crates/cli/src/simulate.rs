//! `simulate`: run one of the stock simulation studies (optionally with
//! axis overrides), write the cell table as CSV and JSON, and print a wide
//! rejection-rate summary.

use std::path::PathBuf;

use clap::{Args, Subcommand};

use nloi::experiments::{
    power_grid, run_grid, sparsity_grid, type1_grid, write_cells_csv, write_cells_json,
    CellResult, ExperimentGrid, DEFAULT_MASTER_SEED, SIM_MEASURES,
};

use crate::util::{write_atomic, CliError};

#[derive(Args)]
pub struct SimulateArgs {
    #[command(subcommand)]
    study: Study,
}

#[derive(Subcommand)]
enum Study {
    /// Null calibration: no signal; rates estimate the test size.
    Type1(StudyFlags),
    /// Power curves over the signal axis.
    Power(StudyFlags),
    /// Power across between-group sparsity levels.
    Sparsity(StudyFlags),
}

#[derive(Args)]
struct StudyFlags {
    /// Override the node-count axis (comma list).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Override the group-count axis (comma list).
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Override the signal axis (comma list).
    #[arg(long, value_delimiter = ',')]
    signal: Option<Vec<f64>>,
    /// Override the sparsity axis (comma list).
    #[arg(long, value_delimiter = ',')]
    sparsity: Option<Vec<f64>>,
    /// Replicates per cell.
    #[arg(long)]
    replicates: Option<usize>,
    /// Permutations per replicate.
    #[arg(long)]
    permutations: Option<usize>,
    /// Per-test significance level.
    #[arg(long)]
    alpha: Option<f64>,
    /// Master seed; cells derive their seeds from it and their parameters.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV and JSON outputs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn apply_overrides(mut grid: ExperimentGrid, flags: &StudyFlags) -> ExperimentGrid {
    if let Some(ns) = &flags.n {
        grid.ns = ns.clone();
    }
    if let Some(ks) = &flags.k {
        grid.ks = ks.clone();
    }
    if let Some(signals) = &flags.signal {
        grid.signals = signals.clone();
    }
    if let Some(sparsities) = &flags.sparsity {
        grid.sparsities = sparsities.clone();
    }
    if let Some(replicates) = flags.replicates {
        grid.replicates = replicates;
    }
    if let Some(permutations) = flags.permutations {
        grid.permutations = permutations;
    }
    if let Some(alpha) = flags.alpha {
        grid.alpha = alpha;
    }
    grid
}

fn print_summary(cells: &[CellResult]) {
    print!("{:>6} {:>4} {:>7} {:>9}", "n", "K", "signal", "sparsity");
    for m in SIM_MEASURES {
        print!(" {:>10}", m.label());
    }
    println!();
    for c in cells {
        print!("{:>6} {:>4} {:>7} {:>9}", c.n, c.k, c.signal, c.sparsity);
        for m in &c.measures {
            print!(" {:>10.3}", m.rejection_rate);
        }
        println!();
    }
}

pub fn run(args: SimulateArgs) -> Result<(), CliError> {
    let (name, flags) = match &args.study {
        Study::Type1(f) => ("type1", f),
        Study::Power(f) => ("power", f),
        Study::Sparsity(f) => ("sparsity", f),
    };
    let seed = flags.seed.unwrap_or(DEFAULT_MASTER_SEED);
    let stock = match &args.study {
        Study::Type1(_) => type1_grid(seed),
        Study::Power(_) => power_grid(seed),
        Study::Sparsity(_) => sparsity_grid(seed),
    };
    let grid = apply_overrides(stock, flags);
    let cells = run_grid(&grid)?;

    let csv_path = flags.out.join(format!("{name}.csv"));
    let json_path = flags.out.join(format!("{name}.json"));
    write_atomic(&csv_path, |w| write_cells_csv(&cells, w))?;
    write_atomic(&json_path, |w| write_cells_json(&cells, w))?;

    println!(
        "{name}: {} cells, {} replicates x {} permutations, alpha = {}, master seed = {}",
        cells.len(),
        grid.replicates,
        grid.permutations,
        grid.alpha,
        grid.master_seed
    );
    println!();
    print_summary(&cells);
    println!();
    println!("Wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}
