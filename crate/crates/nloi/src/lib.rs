//! Agreement between a fuzzy ensemble co-occurrence matrix and the crisp
//! co-occurrence matrix induced by a single surrogate partition.
//!
//! An ensemble of trees says how often each pair of observations lands
//! together; a surrogate tree says either they share a terminal node or they
//! do not. Correlation-style association (the Mantel statistic) cannot see
//! the difference between a surrogate that reproduces those co-occurrence
//! frequencies and one that merely orders pairs the same way, so this crate
//! centers on a divergence that does: the interpretability loss, a
//! chi-squared-family discrepancy with the convenient normalization
//! [`measures::nloi`] in [0, 1] and an exact split into within-node and
//! between-node parts ([`measures::loi_decompose`]). Alongside it sit the
//! Hellinger distance, a proximity-weighted RMSE, the RV coefficient,
//! windowed SSIM, and the Mantel correlation, so one fuzzy/crisp pair can be
//! judged from several angles at once.
//!
//! Significance is assessed by a unified permutation engine
//! ([`permtest::run_permutation_test`]) that reorders the surrogate's rows
//! and columns simultaneously, evaluates every requested measure on each
//! permuted pair in one pass, and reports Phipson-Smyth p-values, Z-scores,
//! and permutation confidence intervals. [`simgen`] draws synthetic
//! fuzzy/crisp pairs with controlled signal and sparsity, and
//! [`experiments`] drives the Monte Carlo grids that calibrate the test's
//! size and power.
//!
//! Everything numeric is generic over the scalar type via [`Scalar`]
//! (`f32` or `f64`); the `F64`-suffixed aliases at the crate root pick the
//! default precision. Results are deterministic for a given seed, down to
//! bit-identical reports across thread counts.
//!
//! ```
//! use nloi::matrix::{NodeWeights, Partition, ProximityMatrix};
//! use nloi::measures::{nloi, loi_decompose};
//!
//! let o = ProximityMatrix::from_pair_values(3, &[0.8, 0.2, 0.6])?;
//! let part = Partition::from_labels(vec![1, 1, 2])?;
//! let ohat = part.to_crisp(&NodeWeights::unit())?;
//!
//! let divergence: f64 = nloi(&o, &ohat)?;
//! assert!((divergence - 0.28).abs() < 1e-12);
//!
//! let split = loi_decompose(&o, &ohat, &part)?;
//! assert!(split.mean_out.unwrap() > split.mean_in.unwrap());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod experiments;
pub mod io;
pub mod matrix;
pub mod measures;
pub mod permtest;
pub mod simgen;
mod ssim;

pub use matrix::{MatrixError, NodeWeights, Partition, PartitionError, ProximityMatrix, Scalar};
pub use measures::{MeasureError, MeasureKind, MeasureParams, Orientation};
pub use permtest::{
    run_permutation_test, MeasureReport, PermTestConfig, PermTestError, PermutationScheme,
    TestReport,
};
pub use simgen::{gen_pair, ScenarioError, SimPair, SimScenario};
pub use experiments::{run_grid, CellResult, ExperimentGrid, DEFAULT_MASTER_SEED};

/// Default-precision proximity matrix.
pub type ProximityMatrixF64 = ProximityMatrix<f64>;
/// Default-precision node weights.
pub type NodeWeightsF64 = NodeWeights<f64>;
/// Default-precision measure parameters.
pub type MeasureParamsF64 = MeasureParams<f64>;
/// Default-precision loss decomposition.
pub type LoIDecompositionF64 = measures::LoIDecomposition<f64>;
/// Double-precision permutation test configuration.
pub type PermTestConfigF64 = PermTestConfig<f64>;
/// Double-precision permutation test report.
pub type TestReportF64 = TestReport<f64>;
/// Double-precision synthetic scenario draw.
pub type SimPairF64 = SimPair<f64>;
