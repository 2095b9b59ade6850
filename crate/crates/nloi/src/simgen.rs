//! Synthetic ensemble/surrogate pairs with controllable agreement.
//!
//! A scenario plants `k` balanced groups on `n` nodes and produces two
//! matrices per draw:
//!
//! * an "ensemble" matrix whose pair values are truncated-normal draws with
//!   a high mean inside groups and a low mean between groups, with an exact
//!   fraction of the between-group entries zeroed (sparsity);
//! * a crisp "surrogate" matrix built from a diluted copy of the group
//!   labels, where a `signal` of 1 keeps the planted labels, 0 replaces all
//!   of them with fresh uniform labels, and intermediate values refresh a
//!   proportional subset of nodes.
//!
//! All randomness flows through a single ChaCha stream seeded by the
//! scenario, in a fixed draw order, so a scenario is a complete recipe: the
//! same scenario always yields bit-identical matrices.

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::matrix::{pair_index, ProximityMatrix, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("need at least as many nodes as groups, got n = {n} < k = {k}")]
    TooFewNodes { n: usize, k: usize },
    #[error("signal must lie in [0, 1], got {0}")]
    SignalOutOfRange(f64),
    #[error("sparsity must lie in [0, 1), got {0}")]
    SparsityOutOfRange(f64),
    #[error("group means must lie in [0, 1], got {0}")]
    MeanOutOfRange(f64),
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("labels require at least 2 nodes, got {0}")]
    TooFewLabels(usize),
}

/// Complete recipe for one synthetic ensemble/surrogate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    /// Number of nodes.
    pub n: usize,
    /// Number of planted groups; sizes differ by at most one.
    pub k: usize,
    /// Fraction of nodes whose surrogate label is kept rather than redrawn:
    /// 1 reproduces the planted labels, 0 discards them entirely.
    pub signal: f64,
    /// Fraction of between-group ensemble entries forced to exactly zero.
    pub sparsity: f64,
    /// Truncated-normal location for within-group ensemble values.
    pub mu_within: f64,
    /// Truncated-normal location for between-group ensemble values.
    pub mu_between: f64,
    /// Shared truncated-normal scale.
    pub sigma: f64,
    pub seed: u64,
}

impl SimScenario {
    /// Scenario with the stock value profile: within-group values centered
    /// at 0.7, between-group at 0.1, scale 0.15.
    pub fn new(n: usize, k: usize, signal: f64, sparsity: f64, seed: u64) -> Self {
        Self { n, k, signal, sparsity, mu_within: 0.7, mu_between: 0.1, sigma: 0.15, seed }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.k < 2 {
            return Err(ScenarioError::TooFewGroups(self.k));
        }
        if self.n < self.k {
            return Err(ScenarioError::TooFewNodes { n: self.n, k: self.k });
        }
        if !(0.0..=1.0).contains(&self.signal) {
            return Err(ScenarioError::SignalOutOfRange(self.signal));
        }
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(ScenarioError::SparsityOutOfRange(self.sparsity));
        }
        for mu in [self.mu_within, self.mu_between] {
            if !(0.0..=1.0).contains(&mu) {
                return Err(ScenarioError::MeanOutOfRange(mu));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(ScenarioError::BadSigma(self.sigma));
        }
        Ok(())
    }
}

/// One generated draw: the fuzzy ensemble matrix, the crisp surrogate built
/// from the diluted labels, and both label vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPair<T> {
    pub ensemble: ProximityMatrix<T>,
    pub surrogate: ProximityMatrix<T>,
    /// Planted group labels, 1-based, balanced.
    pub true_groups: Vec<usize>,
    /// Labels after signal dilution; these define the surrogate.
    pub surrogate_groups: Vec<usize>,
}

/// Balanced 1-based group labels in random node order: every group gets
/// n / k nodes and the first n mod k groups one extra.
pub fn balanced_groups(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let base = n / k;
    let extra = n % k;
    let mut labels = Vec::with_capacity(n);
    for g in 1..=k {
        let size = base + usize::from(g <= extra);
        labels.extend(std::iter::repeat(g).take(size));
    }
    labels.shuffle(rng);
    labels
}

/// Normal draw rejected until it lands in [0, 1].
fn truncated_unit_normal(dist: &Normal<f64>, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x = dist.sample(rng);
        if (0.0..=1.0).contains(&x) {
            return x;
        }
    }
}

/// Fuzzy ensemble matrix for the given group labels: row-major upper
/// triangle of truncated-normal draws (within-group location vs between),
/// then exactly round(sparsity * B) of the B between-group entries are
/// zeroed, chosen uniformly without replacement.
pub fn gen_ensemble_matrix<T: Scalar>(
    groups: &[usize],
    scenario: &SimScenario,
    rng: &mut ChaCha8Rng,
) -> ProximityMatrix<T> {
    let n = groups.len();
    let within = Normal::new(scenario.mu_within, scenario.sigma).expect("validated sigma");
    let between = Normal::new(scenario.mu_between, scenario.sigma).expect("validated sigma");

    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    let mut between_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = if groups[i] == groups[j] {
                &within
            } else {
                between_pairs.push(pair_index(n, i, j));
                &between
            };
            values.push(truncated_unit_normal(dist, rng));
        }
    }

    let zeros = (scenario.sparsity * between_pairs.len() as f64).round() as usize;
    for chosen in index::sample(rng, between_pairs.len(), zeros) {
        values[between_pairs[chosen]] = 0.0;
    }

    let cast: Vec<T> = values.iter().map(|&v| T::from_f64(v).unwrap()).collect();
    ProximityMatrix::from_pair_values(n, &cast).expect("generated values lie in [0, 1]")
}

/// Dilutes labels toward noise: round((1 - signal) * n) nodes, chosen
/// uniformly without replacement, get a fresh uniform label in 1..=k. The
/// fresh label may coincide with the old one, so the retained fraction is a
/// lower bound on actual agreement. Signal 1 keeps the input exactly;
/// signal 0 redraws every node.
pub fn apply_signal(
    groups: &[usize],
    signal: f64,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = groups.len();
    let refreshed = ((1.0 - signal) * n as f64).round() as usize;
    let mut labels = groups.to_vec();
    for idx in index::sample(rng, n, refreshed) {
        labels[idx] = rng.gen_range(1..=k);
    }
    labels
}

/// Uniformly shuffled copy of the labels: keeps group sizes, breaks node
/// alignment. A label-level alternative to matrix permutation for null
/// calibration experiments.
pub fn shuffled_labels(groups: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut labels = groups.to_vec();
    labels.shuffle(rng);
    labels
}

/// Crisp co-membership matrix of raw labels: 1 where labels match, 0
/// elsewhere. Labels need not cover a contiguous range; empty label values
/// are fine since only equality matters.
pub fn gen_crisp_matrix<T: Scalar>(labels: &[usize]) -> Result<ProximityMatrix<T>, ScenarioError> {
    let n = labels.len();
    if n < 2 {
        return Err(ScenarioError::TooFewLabels(n));
    }
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            values.push(if labels[i] == labels[j] { T::one() } else { T::zero() });
        }
    }
    Ok(ProximityMatrix::from_pair_values(n, &values).expect("binary values are valid"))
}

/// Generates one ensemble/surrogate pair from a scenario. Draw order is
/// fixed (groups, ensemble values, sparsity zeros, signal dilution), so the
/// output is a pure function of the scenario.
pub fn gen_pair<T: Scalar>(scenario: &SimScenario) -> Result<SimPair<T>, ScenarioError> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let true_groups = balanced_groups(scenario.n, scenario.k, &mut rng);
    let ensemble = gen_ensemble_matrix::<T>(&true_groups, scenario, &mut rng);
    let surrogate_groups = apply_signal(&true_groups, scenario.signal, scenario.k, &mut rng);
    let surrogate = gen_crisp_matrix::<T>(&surrogate_groups)?;
    Ok(SimPair { ensemble, surrogate, true_groups, surrogate_groups })
}
