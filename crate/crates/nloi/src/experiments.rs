//! Monte Carlo harness: rejection rates of the permutation tests over
//! parameter grids of synthetic scenarios.
//!
//! Each grid cell (n, k, signal, sparsity) runs a fixed number of replicate
//! draws; each replicate generates one scenario pair and runs the full
//! permutation test on it, and the cell reports per-measure rejection rates
//! and mean observed statistics.
//!
//! Seeds are keyed by parameter values, not by grid position: the cell seed
//! mixes the master seed with (n, k, signal bits, sparsity bits), and each
//! replicate seed mixes in the replicate index. Running a sub-grid therefore
//! reproduces the full grid's results for the shared cells, and cells are
//! independent of the order in which they are computed. Axis values must be
//! bit-identical for this to hold; the stock grids construct them so.
//!
//! Everything here is f64: rates and aggregate statistics gain nothing from
//! lower precision, and the stock grids exist to be compared against
//! published three-decimal tables.

use std::io;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::measures::MeasureKind;
use crate::permtest::{run_permutation_test, PermTestConfig, PermTestError, PermutationScheme};
use crate::simgen::{gen_pair, ScenarioError, SimScenario};

/// Measures run in the simulation studies. SSIM is excluded: its windowed
/// statistic is not invariant under node relabeling, which the permutation
/// null requires.
pub const SIM_MEASURES: [MeasureKind; 5] = [
    MeasureKind::NLoI,
    MeasureKind::Hellinger,
    MeasureKind::WRmse,
    MeasureKind::Rv,
    MeasureKind::Mantel,
];

/// Master seed used by the stock grids. Chosen once so the stock tables are
/// stable; any master seed gives a valid experiment.
pub const DEFAULT_MASTER_SEED: u64 = 164;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("grid is invalid: {0}")]
    BadGrid(&'static str),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Perm(#[from] PermTestError),
}

/// Cartesian parameter grid plus per-cell replication settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub signals: Vec<f64>,
    pub sparsities: Vec<f64>,
    pub replicates: usize,
    pub permutations: usize,
    pub alpha: f64,
    pub master_seed: u64,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.ns.is_empty() || self.ks.is_empty() || self.signals.is_empty() || self.sparsities.is_empty() {
            return Err(ExperimentError::BadGrid("every parameter axis needs at least one value"));
        }
        if self.replicates == 0 {
            return Err(ExperimentError::BadGrid("replicates must be at least 1"));
        }
        if self.permutations == 0 {
            return Err(ExperimentError::BadGrid("permutations must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ExperimentError::BadGrid("alpha must lie strictly between 0 and 1"));
        }
        Ok(())
    }
}

/// One measure's aggregate over a cell's replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMeasure {
    pub measure: MeasureKind,
    /// Fraction of replicates with p < alpha; an exact multiple of
    /// 1/replicates.
    pub rejection_rate: f64,
    /// Mean observed statistic across replicates.
    pub mean_statistic: f64,
}

/// Aggregates for one (n, k, signal, sparsity) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub n: usize,
    pub k: usize,
    pub signal: f64,
    pub sparsity: f64,
    pub replicates: usize,
    pub measures: Vec<CellMeasure>,
}

/// splitmix64 finalizer; the standard 64-bit avalanche.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds one value into a seed; chaining calls keys a seed by a tuple.
fn mix(seed: u64, value: u64) -> u64 {
    splitmix64(seed ^ splitmix64(value))
}

/// Tag separating the permutation-test stream from the scenario stream of
/// the same replicate.
const PERM_TAG: u64 = 0x5045_524d_5345_4544;

fn cell_seed(master: u64, n: usize, k: usize, signal: f64, sparsity: f64) -> u64 {
    let mut s = mix(master, n as u64);
    s = mix(s, k as u64);
    s = mix(s, signal.to_bits());
    mix(s, sparsity.to_bits())
}

fn run_cell(grid: &ExperimentGrid, n: usize, k: usize, signal: f64, sparsity: f64) -> Result<CellResult, ExperimentError> {
    let cseed = cell_seed(grid.master_seed, n, k, signal, sparsity);
    let rows: Vec<Vec<(bool, f64)>> = (0..grid.replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<(bool, f64)>, ExperimentError> {
            let rep_seed = mix(cseed, rep as u64);
            let scenario = SimScenario::new(n, k, signal, sparsity, rep_seed);
            let pair = gen_pair::<f64>(&scenario)?;
            let cfg = PermTestConfig {
                permutations: grid.permutations,
                alpha: grid.alpha,
                seed: mix(rep_seed, PERM_TAG),
                measures: SIM_MEASURES.to_vec(),
                scheme: PermutationScheme::RowColumn,
                params: Default::default(),
                keep_null_samples: false,
            };
            let report = run_permutation_test(&pair.ensemble, &pair.surrogate, &cfg)?;
            Ok(report.measures.iter().map(|m| (m.rejected, m.observed)).collect())
        })
        .collect::<Result<_, _>>()?;

    let reps = grid.replicates as f64;
    let measures = SIM_MEASURES
        .iter()
        .enumerate()
        .map(|(idx, &measure)| {
            let rejections = rows.iter().filter(|row| row[idx].0).count();
            let total: f64 = rows.iter().map(|row| row[idx].1).sum();
            CellMeasure {
                measure,
                rejection_rate: rejections as f64 / reps,
                mean_statistic: total / reps,
            }
        })
        .collect();
    Ok(CellResult { n, k, signal, sparsity, replicates: grid.replicates, measures })
}

/// Runs every cell of the grid in row-major cartesian order
/// (n, then k, then signal, then sparsity).
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<CellResult>, ExperimentError> {
    grid.validate()?;
    let mut cells = Vec::new();
    for &n in &grid.ns {
        for &k in &grid.ks {
            for &signal in &grid.signals {
                for &sparsity in &grid.sparsities {
                    cells.push(run_cell(grid, n, k, signal, sparsity)?);
                }
            }
        }
    }
    Ok(cells)
}

/// Null-calibration grid: no signal, so rejection rates estimate the
/// empirical test size at the grid's alpha.
pub fn type1_grid(master_seed: u64) -> ExperimentGrid {
    ExperimentGrid {
        ns: vec![50, 100, 200],
        ks: vec![3, 5, 10],
        signals: vec![0.0],
        sparsities: vec![0.3],
        replicates: 200,
        permutations: 999,
        alpha: 0.05,
        master_seed,
    }
}

/// Power curve grid: signal sweeps 0 to 1 in steps of 0.1 at k = 5.
pub fn power_grid(master_seed: u64) -> ExperimentGrid {
    ExperimentGrid {
        ns: vec![50, 100, 200],
        ks: vec![5],
        signals: (0..=10).map(|i| i as f64 / 10.0).collect(),
        sparsities: vec![0.3],
        replicates: 200,
        permutations: 999,
        alpha: 0.05,
        master_seed,
    }
}

/// Sparsity robustness grid: moderate signal across group counts and
/// between-group zero fractions.
pub fn sparsity_grid(master_seed: u64) -> ExperimentGrid {
    ExperimentGrid {
        ns: vec![100, 200],
        ks: vec![5, 10, 20],
        signals: vec![0.6],
        sparsities: vec![0.0, 0.2, 0.4, 0.6, 0.8],
        replicates: 200,
        permutations: 999,
        alpha: 0.05,
        master_seed,
    }
}

pub fn run_type1(master_seed: u64) -> Result<Vec<CellResult>, ExperimentError> {
    run_grid(&type1_grid(master_seed))
}

pub fn run_power(master_seed: u64) -> Result<Vec<CellResult>, ExperimentError> {
    run_grid(&power_grid(master_seed))
}

pub fn run_sparsity(master_seed: u64) -> Result<Vec<CellResult>, ExperimentError> {
    run_grid(&sparsity_grid(master_seed))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Writes one row per (cell, measure), rates rounded to three decimals and
/// mean statistics at full precision.
pub fn write_cells_csv<W: io::Write + ?Sized>(cells: &[CellResult], w: &mut W) -> io::Result<()> {
    writeln!(w, "n,K,signal,sparsity,measure,rejection_rate,mean_statistic,replicates")?;
    for c in cells {
        for m in &c.measures {
            writeln!(
                w,
                "{},{},{},{},{},{:.3},{},{}",
                c.n,
                c.k,
                c.signal,
                c.sparsity,
                m.measure.id(),
                m.rejection_rate,
                m.mean_statistic,
                c.replicates
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CellsDocument<'a> {
    schema_version: u32,
    cells: &'a [CellResult],
}

/// JSON mirror of the CSV: same cells, same three-decimal rate rounding, one
/// document with a schema version.
pub fn write_cells_json<W: io::Write + ?Sized>(cells: &[CellResult], w: &mut W) -> io::Result<()> {
    let rounded: Vec<CellResult> = cells
        .iter()
        .map(|c| CellResult {
            measures: c
                .measures
                .iter()
                .map(|m| CellMeasure { rejection_rate: round3(m.rejection_rate), ..m.clone() })
                .collect(),
            ..c.clone()
        })
        .collect();
    let doc = CellsDocument { schema_version: 1, cells: &rounded };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_grid() -> ExperimentGrid {
        ExperimentGrid {
            ns: vec![12, 16],
            ks: vec![3],
            signals: vec![0.0, 0.8],
            sparsities: vec![0.2],
            replicates: 4,
            permutations: 19,
            alpha: 0.05,
            master_seed: 77,
        }
    }

    #[test]
    fn seed_chain_separates_parameters_and_replicates() {
        let a = cell_seed(1, 50, 3, 0.0, 0.3);
        assert_ne!(a, cell_seed(1, 50, 5, 0.0, 0.3));
        assert_ne!(a, cell_seed(1, 100, 3, 0.0, 0.3));
        assert_ne!(a, cell_seed(1, 50, 3, 0.1, 0.3));
        assert_ne!(a, cell_seed(1, 50, 3, 0.0, 0.2));
        assert_ne!(a, cell_seed(2, 50, 3, 0.0, 0.3));
        assert_ne!(mix(a, 0), mix(a, 1));
        assert_ne!(mix(a, 0), mix(a, PERM_TAG));
        assert_eq!(a, cell_seed(1, 50, 3, 0.0, 0.3));
    }

    #[test]
    fn grid_runs_reproduce_bit_identically() {
        let grid = tiny_grid();
        let a = run_grid(&grid).unwrap();
        let b = run_grid(&grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sub_grid_reproduces_full_grid_cells() {
        let full = run_grid(&tiny_grid()).unwrap();
        let mut narrowed = tiny_grid();
        narrowed.ns = vec![16];
        narrowed.signals = vec![0.8];
        let sub = run_grid(&narrowed).unwrap();
        assert_eq!(sub.len(), 1);
        let matching = full
            .iter()
            .find(|c| c.n == 16 && c.signal == 0.8)
            .expect("full grid contains the sub-grid cell");
        assert_eq!(&sub[0], matching);
    }

    #[test]
    fn cells_come_out_in_cartesian_order() {
        let grid = tiny_grid();
        let cells = run_grid(&grid).unwrap();
        let order: Vec<(usize, f64)> = cells.iter().map(|c| (c.n, c.signal)).collect();
        assert_eq!(order, vec![(12, 0.0), (12, 0.8), (16, 0.0), (16, 0.8)]);
    }

    #[test]
    fn rejection_rates_are_multiples_of_one_over_replicates() {
        let cells = run_grid(&tiny_grid()).unwrap();
        for c in &cells {
            for m in &c.measures {
                let scaled = m.rejection_rate * c.replicates as f64;
                assert!((scaled - scaled.round()).abs() < 1e-9);
                assert!((0.0..=1.0).contains(&m.rejection_rate));
            }
        }
    }

    #[test]
    fn single_replicate_rate_is_zero_or_one() {
        let mut grid = tiny_grid();
        grid.replicates = 1;
        grid.ns = vec![12];
        grid.signals = vec![1.0];
        let cells = run_grid(&grid).unwrap();
        for m in &cells[0].measures {
            assert!(m.rejection_rate == 0.0 || m.rejection_rate == 1.0);
        }
    }

    #[test]
    fn grid_validation_rejects_empty_axes_and_bad_settings() {
        let mut g = tiny_grid();
        g.ns.clear();
        assert!(run_grid(&g).is_err());
        let mut g = tiny_grid();
        g.replicates = 0;
        assert!(run_grid(&g).is_err());
        let mut g = tiny_grid();
        g.alpha = 0.0;
        assert!(run_grid(&g).is_err());
        let mut g = tiny_grid();
        g.permutations = 0;
        assert!(run_grid(&g).is_err());
    }

    #[test]
    fn csv_layout_is_stable() {
        let mut grid = tiny_grid();
        grid.ns = vec![12];
        grid.signals = vec![0.8];
        let cells = run_grid(&grid).unwrap();
        let mut buf = Vec::new();
        write_cells_csv(&cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,K,signal,sparsity,measure,rejection_rate,mean_statistic,replicates");
        assert_eq!(lines.len(), 1 + SIM_MEASURES.len());
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "12");
        assert_eq!(fields[1], "3");
        assert_eq!(fields[2], "0.8");
        assert_eq!(fields[3], "0.2");
        assert_eq!(fields[4], "nloi");
        // Three-decimal rate, integer replicate count.
        assert_eq!(fields[5].split('.').nth(1).map(str::len), Some(3));
        assert_eq!(fields[7], "4");
    }

    #[test]
    fn json_mirror_has_schema_version_and_lowercase_measure_ids() {
        let mut grid = tiny_grid();
        grid.ns = vec![12];
        grid.signals = vec![0.0];
        let cells = run_grid(&grid).unwrap();
        let mut buf = Vec::new();
        write_cells_json(&cells, &mut buf).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc["schema_version"], 1);
        let arr = doc["cells"].as_array().unwrap();
        assert_eq!(arr.len(), 1);
        let ids: Vec<&str> = arr[0]["measures"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| m["measure"].as_str().unwrap())
            .collect();
        assert_eq!(ids, vec!["nloi", "hellinger", "wrmse", "rv", "mantel"]);
        // Rates mirror the CSV rounding: at most three decimals.
        for m in arr[0]["measures"].as_array().unwrap() {
            let r = m["rejection_rate"].as_f64().unwrap();
            assert!((r * 1000.0 - (r * 1000.0).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn stock_grids_have_the_documented_shape() {
        let t1 = type1_grid(DEFAULT_MASTER_SEED);
        assert_eq!(t1.ns, vec![50, 100, 200]);
        assert_eq!(t1.ks, vec![3, 5, 10]);
        assert_eq!(t1.signals, vec![0.0]);
        assert_eq!(t1.sparsities, vec![0.3]);
        assert_eq!((t1.replicates, t1.permutations, t1.alpha), (200, 999, 0.05));

        let p = power_grid(DEFAULT_MASTER_SEED);
        assert_eq!(p.ks, vec![5]);
        assert_eq!(p.signals.len(), 11);
        assert_eq!(p.signals[0], 0.0);
        assert_eq!(p.signals[3], 0.3);
        assert_eq!(p.signals[10], 1.0);

        let s = sparsity_grid(DEFAULT_MASTER_SEED);
        assert_eq!(s.ns, vec![100, 200]);
        assert_eq!(s.ks, vec![5, 10, 20]);
        assert_eq!(s.signals, vec![0.6]);
        assert_eq!(s.sparsities, vec![0.0, 0.2, 0.4, 0.6, 0.8]);
    }
}
