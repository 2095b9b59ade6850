//! Proximity matrices and crisp partitions.
//!
//! A [`ProximityMatrix`] is a dense, symmetric n x n matrix with unit diagonal
//! and entries in [0, 1]: entry (i, j) is the proximity between observations
//! i and j. The fuzzy ensemble matrix and the crisp surrogate matrix are both
//! values of this type; every invariant is enforced at construction, so the
//! measure code never re-validates.
//!
//! A [`Partition`] assigns each observation to one of K nodes (labels 1..=K,
//! every node populated). Together with [`NodeWeights`] it induces the crisp
//! matrix whose (i, j) entry is the within-node fit when i and j share a node
//! and exactly zero otherwise.

use std::fmt;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use thiserror::Error;

/// Scalar type the crate is generic over; implemented by `f32` and `f64`.
///
/// Proximities live in [0, 1], so plain IEEE floats plus conversions from the
/// pair counts that appear in normalizations are all that is required.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + std::iter::Sum<T>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Converts a count to the scalar type. Counts here are bounded by n^2 and
/// fit every supported float exactly (pair counts stay far below 2^24).
pub(crate) fn cast_count<T: Scalar>(count: usize) -> T {
    T::from_usize(count).expect("count representable in scalar type")
}

pub(crate) fn to_f64<T: Scalar>(value: T) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Position of pair (i, j), i < j, in the row-major packed upper triangle of
/// an n x n matrix. `ProximityMatrix::pair_values` and the per-pair variant
/// of [`NodeWeights`] use this layout.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is not square: {rows} rows, but row {row} has {cols} columns")]
    NonSquare { rows: usize, row: usize, cols: usize },
    #[error("matrix must be at least 2x2, got {0}x{0}")]
    TooSmall(usize),
    #[error("asymmetry beyond tolerance at ({i}, {j}): |a_ij - a_ji| = {delta:e}")]
    AsymmetryBeyondTolerance { i: usize, j: usize, delta: f64 },
    #[error("diagonal entry {i} is {value}, expected 1")]
    DiagonalNotUnit { i: usize, value: f64 },
    #[error("entry ({i}, {j}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { i: usize, j: usize, value: f64 },
    #[error("permutation has length {got}, matrix has {expected} rows")]
    PermutationLengthMismatch { expected: usize, got: usize },
    #[error("permutation is not a bijection: index {0} repeated or out of range")]
    InvalidPermutation(usize),
    #[error("expected {expected} packed pair values for n = {n}, got {got}")]
    PairCountMismatch { n: usize, expected: usize, got: usize },
}

/// Symmetric proximity matrix with unit diagonal and entries in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix<T> {
    n: usize,
    /// Row-major, length n * n. Kept symmetric with exact unit diagonal.
    values: Vec<T>,
}

impl<T: Scalar> ProximityMatrix<T> {
    /// Validates raw row data and builds a matrix, repairing asymmetry within
    /// `tolerance` by averaging mirrored entries. Diagonal entries must equal
    /// one within `tolerance` (checked, never silently repaired beyond it);
    /// accepted diagonals are stored as exactly one.
    // The negated comparisons also send NaN input down the error arm.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn from_raw(rows: &[Vec<T>], tolerance: T) -> Result<Self, MatrixError> {
        debug_assert!(tolerance >= T::zero());
        let n = rows.len();
        if n < 2 {
            return Err(MatrixError::TooSmall(n));
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NonSquare { rows: n, row, cols: r.len() });
            }
        }
        let mut values = vec![T::zero(); n * n];
        let one = T::one();
        for i in 0..n {
            let d = rows[i][i];
            if !((d - one).abs() <= tolerance) {
                return Err(MatrixError::DiagonalNotUnit { i, value: to_f64(d) });
            }
            values[i * n + i] = one;
            for j in (i + 1)..n {
                let a = rows[i][j];
                let b = rows[j][i];
                for (value, (vi, vj)) in [(a, (i, j)), (b, (j, i))] {
                    if !(value >= T::zero() && value <= one) {
                        return Err(MatrixError::EntryOutOfRange {
                            i: vi,
                            j: vj,
                            value: to_f64(value),
                        });
                    }
                }
                let delta = (a - b).abs();
                if !(delta <= tolerance) {
                    return Err(MatrixError::AsymmetryBeyondTolerance { i, j, delta: to_f64(delta) });
                }
                // Adding zero maps -0.0 to +0.0; stored entries then make
                // max() independent of argument order.
                let avg = (a + b) / (one + one) + T::zero();
                values[i * n + j] = avg;
                values[j * n + i] = avg;
            }
        }
        Ok(Self { n, values })
    }

    /// Strict constructor: rows must already satisfy every invariant exactly.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, MatrixError> {
        Self::from_raw(rows, T::zero())
    }

    /// Builds a matrix from packed upper-triangle values (see [`pair_index`]),
    /// with the diagonal set to one. Entries are bounds-checked.
    pub fn from_pair_values(n: usize, upper: &[T]) -> Result<Self, MatrixError> {
        if n < 2 {
            return Err(MatrixError::TooSmall(n));
        }
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(MatrixError::PairCountMismatch { n, expected, got: upper.len() });
        }
        let mut values = vec![T::zero(); n * n];
        let mut idx = 0;
        for i in 0..n {
            values[i * n + i] = T::one();
            for j in (i + 1)..n {
                let v = upper[idx];
                idx += 1;
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(MatrixError::EntryOutOfRange { i, j, value: to_f64(v) });
                }
                // -0.0 normalizes to +0.0 so max() stays argument-symmetric.
                let v = v + T::zero();
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unordered off-diagonal pairs, M = n(n-1)/2.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Row-major dense storage, length n * n.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Iterates upper-triangle pairs (i, j, value) with i < j in row-major
    /// order; every per-pair sum in the crate runs in this order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.values[i * n + j])))
    }

    /// Packed upper-triangle values in [`pair_index`] order.
    pub fn pair_values(&self) -> Vec<T> {
        self.pairs().map(|(_, _, v)| v).collect()
    }

    /// Simultaneous row/column permutation: result[i][j] = self[perm[i]][perm[j]].
    /// `perm` must be a bijection of 0..n. Multisets of off-diagonal values,
    /// block sizes, and the sparsity pattern are preserved.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, MatrixError> {
        let n = self.n;
        if perm.len() != n {
            return Err(MatrixError::PermutationLengthMismatch { expected: n, got: perm.len() });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(MatrixError::InvalidPermutation(p));
            }
            seen[p] = true;
        }
        let mut values = Vec::with_capacity(n * n);
        for &pi in perm {
            let src = &self.values[pi * n..(pi + 1) * n];
            values.extend(perm.iter().map(|&pj| src[pj]));
        }
        Ok(Self { n, values })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition needs at least 2 observations, got {0}")]
    TooFew(usize),
    #[error("node count must be positive")]
    NoNodes,
    #[error("label {label} at position {index} lies outside 1..={k}")]
    LabelOutOfRange { index: usize, label: usize, k: usize },
    #[error("node {0} has no members")]
    EmptyNode(usize),
}

/// Assignment of n observations to K terminal nodes, labels in 1..=K with
/// every node populated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

/// The split of unordered pairs induced by a partition: `within` holds pairs
/// sharing a node, `between` the rest. Together they cover all M pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSplit {
    pub within: Vec<(usize, usize)>,
    pub between: Vec<(usize, usize)>,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self, PartitionError> {
        if labels.len() < 2 {
            return Err(PartitionError::TooFew(labels.len()));
        }
        if k == 0 {
            return Err(PartitionError::NoNodes);
        }
        let mut seen = vec![false; k];
        for (index, &label) in labels.iter().enumerate() {
            if label == 0 || label > k {
                return Err(PartitionError::LabelOutOfRange { index, label, k });
            }
            seen[label - 1] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(PartitionError::EmptyNode(empty + 1));
        }
        Ok(Self { labels, k })
    }

    /// Infers K as the largest label; every label 1..=K must occur.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self, PartitionError> {
        let k = labels.iter().copied().max().unwrap_or(0);
        Self::new(labels, k)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn node_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &label in &self.labels {
            sizes[label - 1] += 1;
        }
        sizes
    }

    /// Splits all unordered pairs into within-node and between-node sets.
    pub fn pair_split(&self) -> PairSplit {
        let n = self.n();
        let mut within = Vec::new();
        let mut between = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.labels[i] == self.labels[j] {
                    within.push((i, j));
                } else {
                    between.push((i, j));
                }
            }
        }
        PairSplit { within, between }
    }

    /// Builds the crisp matrix induced by this partition: within-node pairs
    /// get their node's (or pair's) fit weight, between-node pairs exactly
    /// zero, diagonal one.
    pub fn to_crisp<T: Scalar>(&self, weights: &NodeWeights<T>) -> Result<ProximityMatrix<T>, WeightError> {
        let n = self.n();
        match weights {
            NodeWeights::PerPair { n: wn, upper } => {
                let expected = wn * wn.saturating_sub(1) / 2;
                if *wn != n || upper.len() != expected {
                    return Err(WeightError::DimensionMismatch { expected: n, got: *wn });
                }
            }
            NodeWeights::PerNode(per_node) if per_node.len() != self.k => {
                return Err(WeightError::NodeCountMismatch {
                    expected: self.k,
                    got: per_node.len(),
                });
            }
            _ => {}
        }
        let mut values = vec![T::zero(); n * n];
        for i in 0..n {
            values[i * n + i] = T::one();
            for j in (i + 1)..n {
                if self.labels[i] != self.labels[j] {
                    continue;
                }
                let w = match weights {
                    NodeWeights::Constant(w) => {
                        check_weight(*w, || WeightError::NodeWeightOutOfRange {
                            node: self.labels[i],
                            value: to_f64(*w),
                        })?
                    }
                    NodeWeights::PerNode(per_node) => {
                        let node = self.labels[i];
                        let w = per_node[node - 1];
                        check_weight(w, || WeightError::NodeWeightOutOfRange {
                            node,
                            value: to_f64(w),
                        })?
                    }
                    NodeWeights::PerPair { upper, .. } => {
                        let w = upper[pair_index(n, i, j)];
                        check_weight(w, || WeightError::PairWeightOutOfRange {
                            i,
                            j,
                            value: to_f64(w),
                        })?
                    }
                };
                // -0.0 normalizes to +0.0 so max() stays argument-symmetric.
                let w = w + T::zero();
                values[i * n + j] = w;
                values[j * n + i] = w;
            }
        }
        Ok(ProximityMatrix { n, values })
    }
}

fn check_weight<T: Scalar, E: FnOnce() -> WeightError>(w: T, err: E) -> Result<T, WeightError> {
    if w >= T::zero() && w <= T::one() {
        Ok(w)
    } else {
        Err(err())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("expected one weight per node ({expected}), got {got}")]
    NodeCountMismatch { expected: usize, got: usize },
    #[error("weight for node {node} = {value} lies outside [0, 1]")]
    NodeWeightOutOfRange { node: usize, value: f64 },
    #[error("weight for pair ({i}, {j}) = {value} lies outside [0, 1]")]
    PairWeightOutOfRange { i: usize, j: usize, value: f64 },
    #[error("per-pair weights sized for n = {got}, partition has n = {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Within-node fit weights used when synthesizing a crisp matrix.
///
/// The default mode assigns one constant per node; `PerPair` carries an
/// externally supplied fit value for each pair (packed upper triangle, see
/// [`pair_index`]), of which only within-node entries are consulted.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeWeights<T> {
    /// Every node shares one within-node weight. `Constant(1)` yields the
    /// binary crisp matrix.
    Constant(T),
    /// `weights[k - 1]` is the within-node weight of node k.
    PerNode(Vec<T>),
    /// Per-pair within-node fits in packed upper-triangle order.
    PerPair { n: usize, upper: Vec<T> },
}

impl<T: Scalar> NodeWeights<T> {
    /// Unit weights: the binary crisp matrix of the partition.
    pub fn unit() -> Self {
        NodeWeights::Constant(T::one())
    }
}
