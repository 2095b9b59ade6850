//! Scalar agreement measures between a fuzzy and a crisp proximity matrix.
//!
//! Divergences (zero means perfect agreement): the interpretability loss
//! [`loi`] and its normalization [`nloi`], the pairwise [`hellinger`]
//! distance with its Freeman-Tukey scaling [`freeman_tukey`], and the
//! weighted RMSE [`wrmse`]. Similarities (one means perfect agreement):
//! [`rv_coefficient`], windowed [`ssim`], and the Mantel correlation
//! [`mantel`]. All sums run over unordered off-diagonal pairs i < j except
//! SSIM, which treats the full matrices as grayscale images.
//!
//! Every measure is exactly symmetric in its arguments: the two matrices can
//! be swapped without changing a single result bit. Each function validates
//! dimensions itself and never panics on well-formed inputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{cast_count, Partition, ProximityMatrix, Scalar};
use crate::ssim::ssim_mean;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("dimension mismatch: first matrix has n = {left}, second has n = {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("partition covers {partition} observations, matrices have n = {matrix}")]
    PartitionSizeMismatch { matrix: usize, partition: usize },
    #[error("degenerate input: {0}")]
    DegenerateMatrix(&'static str),
    #[error("SSIM window {window} exceeds matrix size n = {n}")]
    WindowTooLarge { window: usize, n: usize },
    #[error("SSIM window must be at least 1")]
    ZeroWindow,
    #[error("wRMSE epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("surrogate has a nonzero entry at between-node pair ({i}, {j})")]
    InconsistentPartition { i: usize, j: usize },
}

/// Whether small or large values of a measure indicate agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Zero at perfect agreement; larger is worse.
    Divergence,
    /// One at perfect agreement; larger is better.
    Similarity,
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Orientation::Divergence => "divergence",
            Orientation::Similarity => "similarity",
        })
    }
}

/// The measure family the permutation engine can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    NLoI,
    Hellinger,
    WRmse,
    Rv,
    Ssim,
    Mantel,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::NLoI,
        MeasureKind::Hellinger,
        MeasureKind::WRmse,
        MeasureKind::Rv,
        MeasureKind::Ssim,
        MeasureKind::Mantel,
    ];

    pub fn orientation(self) -> Orientation {
        match self {
            MeasureKind::NLoI | MeasureKind::Hellinger | MeasureKind::WRmse => {
                Orientation::Divergence
            }
            MeasureKind::Rv | MeasureKind::Ssim | MeasureKind::Mantel => Orientation::Similarity,
        }
    }

    /// Stable lowercase identifier used in JSON, CSV, and CLI flags.
    pub fn id(self) -> &'static str {
        match self {
            MeasureKind::NLoI => "nloi",
            MeasureKind::Hellinger => "hellinger",
            MeasureKind::WRmse => "wrmse",
            MeasureKind::Rv => "rv",
            MeasureKind::Ssim => "ssim",
            MeasureKind::Mantel => "mantel",
        }
    }

    /// Human-facing label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            MeasureKind::NLoI => "nLoI",
            MeasureKind::Hellinger => "Hellinger",
            MeasureKind::WRmse => "wRMSE",
            MeasureKind::Rv => "RV",
            MeasureKind::Ssim => "SSIM",
            MeasureKind::Mantel => "Mantel",
        }
    }

    /// Attainable closed range of the measure.
    pub fn range(self) -> (f64, f64) {
        match self {
            MeasureKind::NLoI | MeasureKind::Hellinger | MeasureKind::WRmse | MeasureKind::Rv => {
                (0.0, 1.0)
            }
            MeasureKind::Ssim | MeasureKind::Mantel => (-1.0, 1.0),
        }
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown measure {0:?}; expected one of nloi, hellinger, wrmse, rv, ssim, mantel")]
pub struct ParseMeasureError(pub String);

impl std::str::FromStr for MeasureKind {
    type Err = ParseMeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.id() == lower)
            .ok_or_else(|| ParseMeasureError(s.to_string()))
    }
}

/// Tunable constants consumed by [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureParams<T> {
    /// wRMSE stability floor for the weight of an all-zero pair.
    pub epsilon: T,
    /// SSIM window side; `None` selects min(n, 8).
    pub ssim_window: Option<usize>,
    /// SSIM luminance stabilizer, (0.01 * L)^2 with L = 1.
    pub ssim_c1: T,
    /// SSIM contrast stabilizer, (0.03 * L)^2 with L = 1.
    pub ssim_c2: T,
}

impl<T: Scalar> Default for MeasureParams<T> {
    fn default() -> Self {
        Self {
            epsilon: T::from_f64(1e-8).unwrap(),
            ssim_window: None,
            ssim_c1: T::from_f64(1e-4).unwrap(),
            ssim_c2: T::from_f64(9e-4).unwrap(),
        }
    }
}

impl<T: Scalar> MeasureParams<T> {
    /// Window side actually used for an n x n matrix pair.
    pub fn effective_ssim_window(&self, n: usize) -> usize {
        self.ssim_window.unwrap_or_else(|| n.min(8))
    }
}

/// Evaluates one measure under the given parameters.
pub fn evaluate<T: Scalar>(
    kind: MeasureKind,
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    params: &MeasureParams<T>,
) -> Result<T, MeasureError> {
    match kind {
        MeasureKind::NLoI => nloi(o, ohat),
        MeasureKind::Hellinger => hellinger(o, ohat),
        MeasureKind::WRmse => wrmse(o, ohat, params.epsilon),
        MeasureKind::Rv => rv_coefficient(o, ohat),
        MeasureKind::Ssim => ssim(
            o,
            ohat,
            params.effective_ssim_window(o.n()),
            params.ssim_c1,
            params.ssim_c2,
        ),
        MeasureKind::Mantel => mantel(o, ohat),
    }
}

fn check_dims<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
) -> Result<usize, MeasureError> {
    if o.n() != ohat.n() {
        return Err(MeasureError::DimensionMismatch { left: o.n(), right: ohat.n() });
    }
    Ok(o.n())
}

fn clamp<T: Scalar>(value: T, lo: T, hi: T) -> T {
    // Absorbs terminal rounding a few ulps past the attainable range; exact
    // in-range values (0 at equality, 1 at equality) pass through untouched.
    value.max(lo).min(hi)
}

/// One loss summand: (a - b)^2 / max(a, b) with the 0/0 convention.
/// Exactly symmetric in (a, b): negation and squaring commute, and stored
/// entries carry no negative zeros.
#[inline]
fn loi_summand<T: Scalar>(a: T, b: T) -> T {
    let mx = a.max(b);
    if mx > T::zero() {
        let d = a - b;
        d * d / mx
    } else {
        T::zero()
    }
}

fn loi_sum<T: Scalar>(o: &ProximityMatrix<T>, ohat: &ProximityMatrix<T>) -> T {
    let n = o.n();
    let mut sum = T::zero();
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            sum = sum + loi_summand(ra[j], rb[j]);
        }
    }
    sum
}

/// Total interpretability loss, Sum over i < j of (o - ohat)^2 / max(o, ohat)
/// with 0/0 taken as 0. Lies in [0, M] where M = n(n-1)/2.
pub fn loi<T: Scalar>(o: &ProximityMatrix<T>, ohat: &ProximityMatrix<T>) -> Result<T, MeasureError> {
    check_dims(o, ohat)?;
    Ok(loi_sum(o, ohat))
}

/// Normalized interpretability loss in [0, 1]: [`loi`] divided by the pair
/// count M. Zero if and only if the matrices are entrywise equal.
pub fn nloi<T: Scalar>(o: &ProximityMatrix<T>, ohat: &ProximityMatrix<T>) -> Result<T, MeasureError> {
    check_dims(o, ohat)?;
    let m = cast_count::<T>(o.pair_count());
    Ok(clamp(loi_sum(o, ohat) / m, T::zero(), T::one()))
}

/// The loss of [`loi`] split by a partition into the within-node and
/// between-node pair classes, with per-pair class averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoIDecomposition<T> {
    /// Total loss over all pairs, equal to `loi_in + loi_out` up to rounding.
    pub loi_total: T,
    /// Loss over pairs sharing a node.
    pub loi_in: T,
    /// Loss over separated pairs; with a partition-consistent surrogate this
    /// is the plain sum of their ensemble proximities.
    pub loi_out: T,
    /// Number of within-node pairs.
    pub n_in: usize,
    /// Number of between-node pairs.
    pub n_out: usize,
    /// Average within-node loss; `None` when no within-node pair exists.
    pub mean_in: Option<T>,
    /// Average between-node loss; `None` when no between-node pair exists.
    pub mean_out: Option<T>,
}

/// Splits the loss by the partition's pair classes. The surrogate must be
/// consistent with the partition: exactly zero on every between-node pair.
pub fn loi_decompose<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    partition: &Partition,
) -> Result<LoIDecomposition<T>, MeasureError> {
    let n = check_dims(o, ohat)?;
    if partition.n() != n {
        return Err(MeasureError::PartitionSizeMismatch { matrix: n, partition: partition.n() });
    }
    let labels = partition.labels();
    let mut loi_in = T::zero();
    let mut loi_out = T::zero();
    let mut n_in = 0usize;
    let mut n_out = 0usize;
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                loi_in = loi_in + loi_summand(ra[j], rb[j]);
                n_in += 1;
            } else {
                if rb[j] != T::zero() {
                    return Err(MeasureError::InconsistentPartition { i, j });
                }
                // For a separated pair the summand collapses to the ensemble
                // proximity itself: (o - 0)^2 / max(o, 0) = o.
                loi_out = loi_out + ra[j];
                n_out += 1;
            }
        }
    }
    Ok(LoIDecomposition {
        loi_total: loi_sum(o, ohat),
        loi_in,
        loi_out,
        n_in,
        n_out,
        mean_in: (n_in > 0).then(|| loi_in / cast_count(n_in)),
        mean_out: (n_out > 0).then(|| loi_out / cast_count(n_out)),
    })
}

fn hellinger_sq_sum<T: Scalar>(o: &ProximityMatrix<T>, ohat: &ProximityMatrix<T>) -> T {
    let n = o.n();
    let mut sum = T::zero();
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            let d = ra[j].sqrt() - rb[j].sqrt();
            sum = sum + d * d;
        }
    }
    sum
}

/// Pairwise Hellinger distance, sqrt of the mean of (sqrt o - sqrt ohat)^2
/// over all pairs. A metric with values in [0, 1].
pub fn hellinger<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
) -> Result<T, MeasureError> {
    check_dims(o, ohat)?;
    let m = cast_count::<T>(o.pair_count());
    Ok(clamp((hellinger_sq_sum(o, ohat) / m).sqrt(), T::zero(), T::one()))
}

/// Freeman-Tukey statistic, the chi-squared-family scaling of the Hellinger
/// distance: 4 M H^2, computed directly as 4 Sum (sqrt o - sqrt ohat)^2.
pub fn freeman_tukey<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
) -> Result<T, MeasureError> {
    check_dims(o, ohat)?;
    let four = cast_count::<T>(4);
    Ok(four * hellinger_sq_sum(o, ohat))
}

/// Weighted root mean squared error with per-pair weight max(o, ohat, eps).
/// The weight emphasizes pairs where either matrix claims proximity; `eps`
/// only keeps the weight sum positive when both matrices are all zero.
// The negated comparison also sends a NaN epsilon down the error arm.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn wrmse<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    epsilon: T,
) -> Result<T, MeasureError> {
    check_dims(o, ohat)?;
    if !(epsilon > T::zero()) {
        return Err(MeasureError::NonPositiveEpsilon);
    }
    let n = o.n();
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            let w = ra[j].max(rb[j]).max(epsilon);
            let d = ra[j] - rb[j];
            num = num + w * d * d;
            den = den + w;
        }
    }
    Ok(clamp((num / den).sqrt(), T::zero(), T::one()))
}

/// RV coefficient of the two matrices with diagonals zeroed: the cosine
/// between their off-diagonal parts under the trace inner product. Lies in
/// [0, 1] for non-negative matrices; 1 exactly when one off-diagonal part is
/// a positive multiple of the other.
pub fn rv_coefficient<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
) -> Result<T, MeasureError> {
    check_dims(o, ohat)?;
    let n = o.n();
    let mut cross = T::zero();
    let mut sum_aa = T::zero();
    let mut sum_bb = T::zero();
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            let (a, b) = (ra[j], rb[j]);
            cross = cross + a * b;
            sum_aa = sum_aa + a * a;
            sum_bb = sum_bb + b * b;
        }
    }
    // A zero sum of squares means every off-diagonal entry is zero; the
    // full-trace formulation differs from these half sums by an exact factor
    // of 2 that cancels.
    if sum_aa == T::zero() || sum_bb == T::zero() {
        return Err(MeasureError::DegenerateMatrix(
            "a matrix with all-zero off-diagonal entries has no RV direction",
        ));
    }
    Ok(clamp(cross / (sum_aa * sum_bb).sqrt(), T::zero(), T::one()))
}

/// Mean structural similarity across sliding `window` x `window` windows
/// (stride 1, fully interior, uniform weighting, population variance) of the
/// full matrices viewed as grayscale images. Lies in [-1, 1], exactly 1 when
/// the matrices are equal.
pub fn ssim<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    window: usize,
    c1: T,
    c2: T,
) -> Result<T, MeasureError> {
    let n = check_dims(o, ohat)?;
    if window == 0 {
        return Err(MeasureError::ZeroWindow);
    }
    if window > n {
        return Err(MeasureError::WindowTooLarge { window, n });
    }
    let value = ssim_mean(o.values(), ohat.values(), n, window, c1, c2);
    Ok(clamp(value, -T::one(), T::one()))
}

/// Pearson correlation between the off-diagonal pair vectors, the statistic
/// of the classical matrix-association test. Lies in [-1, 1]; insensitive to
/// entrywise affine rescaling of either argument.
pub fn mantel<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
) -> Result<T, MeasureError> {
    let n = check_dims(o, ohat)?;
    let m = cast_count::<T>(o.pair_count());
    let mut sum_a = T::zero();
    let mut sum_b = T::zero();
    let mut min_a = T::infinity();
    let mut max_a = T::neg_infinity();
    let mut min_b = T::infinity();
    let mut max_b = T::neg_infinity();
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            sum_a = sum_a + ra[j];
            sum_b = sum_b + rb[j];
            min_a = min_a.min(ra[j]);
            max_a = max_a.max(ra[j]);
            min_b = min_b.min(rb[j]);
            max_b = max_b.max(rb[j]);
        }
    }
    // Constant off-diagonal values have zero variance exactly when min == max.
    if min_a == max_a || min_b == max_b {
        return Err(MeasureError::DegenerateMatrix(
            "a matrix with constant off-diagonal entries has no Mantel correlation",
        ));
    }
    let mean_a = sum_a / m;
    let mean_b = sum_b / m;
    let mut num = T::zero();
    let mut den_a = T::zero();
    let mut den_b = T::zero();
    for i in 0..n {
        let ra = o.row(i);
        let rb = ohat.row(i);
        for j in (i + 1)..n {
            let da = ra[j] - mean_a;
            let db = rb[j] - mean_b;
            num = num + da * db;
            den_a = den_a + da * da;
            den_b = den_b + db * db;
        }
    }
    Ok(clamp(num / (den_a * den_b).sqrt(), -T::one(), T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::NodeWeights;
    use approx::assert_abs_diff_eq;

    /// n = 3 instance used throughout: fuzzy off-diagonals (0.8, 0.2, 0.6)
    /// against the unit-weight crisp matrix of labels [1, 1, 2].
    fn instance() -> (ProximityMatrix<f64>, ProximityMatrix<f64>, Partition) {
        let o = ProximityMatrix::from_pair_values(3, &[0.8, 0.2, 0.6]).unwrap();
        let p = Partition::from_labels(vec![1, 1, 2]).unwrap();
        let ohat = p.to_crisp(&NodeWeights::unit()).unwrap();
        (o, ohat, p)
    }

    fn constant_matrix(n: usize, c: f64) -> ProximityMatrix<f64> {
        ProximityMatrix::from_pair_values(n, &vec![c; n * (n - 1) / 2]).unwrap()
    }

    #[test]
    fn loi_hand_instance() {
        let (o, ohat, _) = instance();
        assert_abs_diff_eq!(loi(&o, &ohat).unwrap(), 0.84, epsilon = 1e-12);
        assert_abs_diff_eq!(nloi(&o, &ohat).unwrap(), 0.28, epsilon = 1e-12);
    }

    #[test]
    fn loi_zero_iff_equal() {
        let (o, _, _) = instance();
        assert_eq!(loi(&o, &o).unwrap(), 0.0);
        assert_eq!(nloi(&o, &o).unwrap(), 0.0);
        let zero = constant_matrix(4, 0.0);
        assert_eq!(loi(&zero, &zero).unwrap(), 0.0);
    }

    #[test]
    fn nloi_saturates_at_one() {
        let ones = constant_matrix(4, 1.0);
        let zeros = constant_matrix(4, 0.0);
        assert_eq!(nloi(&ones, &zeros).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let a = constant_matrix(3, 0.5);
        let b = constant_matrix(4, 0.5);
        assert_eq!(
            loi(&a, &b).unwrap_err(),
            MeasureError::DimensionMismatch { left: 3, right: 4 }
        );
    }

    #[test]
    fn decomposition_hand_instance() {
        let (o, ohat, p) = instance();
        let d = loi_decompose(&o, &ohat, &p).unwrap();
        assert_abs_diff_eq!(d.loi_in, 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(d.loi_out, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(d.loi_total, d.loi_in + d.loi_out, epsilon = 1e-12);
        assert_eq!((d.n_in, d.n_out), (1, 2));
        assert_abs_diff_eq!(d.mean_in.unwrap(), 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(d.mean_out.unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn decomposition_empty_classes_flag_undefined_means() {
        let o = constant_matrix(4, 0.5);
        let all_one = Partition::from_labels(vec![1, 1, 1, 1]).unwrap();
        let ohat = all_one.to_crisp(&NodeWeights::unit()).unwrap();
        let d = loi_decompose(&o, &ohat, &all_one).unwrap();
        assert_eq!(d.n_out, 0);
        assert_eq!(d.loi_out, 0.0);
        assert_eq!(d.mean_out, None);

        let singletons = Partition::from_labels(vec![1, 2, 3, 4]).unwrap();
        let ohat = singletons.to_crisp(&NodeWeights::unit()).unwrap();
        let d = loi_decompose(&o, &ohat, &singletons).unwrap();
        assert_eq!(d.n_in, 0);
        assert_eq!(d.mean_in, None);
        assert_abs_diff_eq!(d.loi_out, 0.5 * 6.0, epsilon = 1e-12);
    }

    #[test]
    fn decomposition_zero_at_perfect_reconstruction() {
        let (_, ohat, p) = instance();
        let d = loi_decompose(&ohat, &ohat, &p).unwrap();
        assert_eq!((d.loi_in, d.loi_out, d.loi_total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn decomposition_rejects_inconsistent_surrogate() {
        let (o, _, p) = instance();
        // Entry (1, 2) crosses the node boundary but is nonzero in o.
        let err = loi_decompose(&o, &o, &p).unwrap_err();
        assert_eq!(err, MeasureError::InconsistentPartition { i: 0, j: 2 });
    }

    #[test]
    fn hellinger_hand_instance() {
        let (o, ohat, _) = instance();
        assert_abs_diff_eq!(
            hellinger(&o, &ohat).unwrap(),
            0.5199825695797147,
            epsilon = 1e-12
        );
        assert_eq!(hellinger(&o, &o).unwrap(), 0.0);
        let ones = constant_matrix(3, 1.0);
        let zeros = constant_matrix(3, 0.0);
        assert_eq!(hellinger(&ones, &zeros).unwrap(), 1.0);
    }

    #[test]
    fn freeman_tukey_hand_instance() {
        let (o, ohat, _) = instance();
        assert_abs_diff_eq!(
            freeman_tukey(&o, &ohat).unwrap(),
            3.2445824720006735,
            epsilon = 1e-10
        );
        assert_eq!(freeman_tukey(&o, &o).unwrap(), 0.0);

        let one_pair = constant_matrix(2, 1.0);
        let zero_pair = constant_matrix(2, 0.0);
        assert_eq!(freeman_tukey(&one_pair, &zero_pair).unwrap(), 4.0);
    }

    #[test]
    fn freeman_tukey_is_scaled_squared_hellinger() {
        let (o, ohat, _) = instance();
        let h = hellinger(&o, &ohat).unwrap();
        let ft = freeman_tukey(&o, &ohat).unwrap();
        assert_abs_diff_eq!(ft, 4.0 * 3.0 * h * h, epsilon = 1e-10);
    }

    #[test]
    fn wrmse_hand_instance() {
        let (o, ohat, _) = instance();
        let v = wrmse(&o, &ohat, 1e-8).unwrap();
        // Hand evaluation: weights (1, 0.2, 0.6), weighted squared errors
        // 0.04 + 0.008 + 0.216 = 0.264, weight sum 1.8.
        assert_abs_diff_eq!(v, (0.264f64 / 1.8).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.38297084310253526, epsilon = 1e-12);
    }

    #[test]
    fn wrmse_zero_cases_and_epsilon_guard() {
        let (o, _, _) = instance();
        assert_eq!(wrmse(&o, &o, 1e-8).unwrap(), 0.0);
        let zeros = constant_matrix(3, 0.0);
        assert_eq!(wrmse(&zeros, &zeros, 1e-8).unwrap(), 0.0);
        assert_eq!(wrmse(&o, &o, 0.0).unwrap_err(), MeasureError::NonPositiveEpsilon);
    }

    #[test]
    fn rv_hand_instance() {
        let (o, ohat, _) = instance();
        assert_abs_diff_eq!(
            rv_coefficient(&o, &ohat).unwrap(),
            0.7844645405527361,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            rv_coefficient(&o, &ohat).unwrap(),
            1.6 / (2.08f64 * 2.0).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rv_is_one_at_equality_and_under_scaling() {
        let (o, _, _) = instance();
        assert_abs_diff_eq!(rv_coefficient(&o, &o).unwrap(), 1.0, epsilon = 1e-12);
        let half = ProximityMatrix::from_pair_values(3, &[0.4, 0.1, 0.3]).unwrap();
        assert_abs_diff_eq!(rv_coefficient(&o, &half).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rv_degenerate_on_all_zero() {
        let (o, _, _) = instance();
        let zeros = constant_matrix(3, 0.0);
        assert!(matches!(
            rv_coefficient(&o, &zeros).unwrap_err(),
            MeasureError::DegenerateMatrix(_)
        ));
    }

    #[test]
    fn mantel_hand_instance() {
        let (o, ohat, _) = instance();
        let r = mantel(&o, &ohat).unwrap();
        assert_abs_diff_eq!(r, 0.7559289460184547, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 2.0 / 7.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn mantel_affine_invariance_versus_nloi_sensitivity() {
        let (o, _, _) = instance();
        let half = ProximityMatrix::from_pair_values(3, &[0.4, 0.1, 0.3]).unwrap();
        assert_abs_diff_eq!(mantel(&o, &half).unwrap(), 1.0, epsilon = 1e-12);
        assert!(nloi(&o, &half).unwrap() > 0.0);

        let affine = ProximityMatrix::from_pair_values(3, &[0.5, 0.2, 0.4]).unwrap();
        assert_abs_diff_eq!(mantel(&o, &affine).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mantel_self_correlation_is_exactly_one() {
        let (o, _, _) = instance();
        assert_eq!(mantel(&o, &o).unwrap(), 1.0);
    }

    #[test]
    fn mantel_degenerate_on_constant() {
        let (o, _, _) = instance();
        let flat = constant_matrix(3, 0.5);
        assert!(matches!(mantel(&o, &flat).unwrap_err(), MeasureError::DegenerateMatrix(_)));
    }

    #[test]
    fn ssim_equality_and_window_checks() {
        let (o, ohat, _) = instance();
        assert_eq!(ssim(&o, &o, 3, 1e-4, 9e-4).unwrap(), 1.0);
        assert_eq!(
            ssim(&o, &ohat, 4, 1e-4, 9e-4).unwrap_err(),
            MeasureError::WindowTooLarge { window: 4, n: 3 }
        );
        assert_eq!(ssim(&o, &ohat, 0, 1e-4, 9e-4).unwrap_err(), MeasureError::ZeroWindow);
    }

    #[test]
    fn ssim_constant_equal_matrices_score_one() {
        let a = constant_matrix(6, 0.4);
        let b = constant_matrix(6, 0.4);
        assert_eq!(ssim(&a, &b, 4, 1e-4, 9e-4).unwrap(), 1.0);
    }

    #[test]
    fn ssim_differs_from_one_under_disagreement() {
        let (o, ohat, _) = instance();
        let v = ssim(&o, &ohat, 3, 1e-4, 9e-4).unwrap();
        assert!((-1.0..1.0).contains(&v));
    }

    #[test]
    fn all_measures_exactly_symmetric_on_instance() {
        let (o, ohat, _) = instance();
        let params = MeasureParams::default();
        for kind in MeasureKind::ALL {
            let ab = evaluate(kind, &o, &ohat, &params).unwrap();
            let ba = evaluate(kind, &ohat, &o, &params).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits(), "{kind} not exactly symmetric");
        }
        let ft_ab = freeman_tukey(&o, &ohat).unwrap();
        let ft_ba = freeman_tukey(&ohat, &o).unwrap();
        assert_eq!(ft_ab.to_bits(), ft_ba.to_bits());
    }

    #[test]
    fn evaluate_dispatch_matches_direct_calls() {
        let (o, ohat, _) = instance();
        let params = MeasureParams::default();
        assert_eq!(
            evaluate(MeasureKind::NLoI, &o, &ohat, &params).unwrap(),
            nloi(&o, &ohat).unwrap()
        );
        assert_eq!(
            evaluate(MeasureKind::Ssim, &o, &ohat, &params).unwrap(),
            ssim(&o, &ohat, 3, 1e-4, 9e-4).unwrap()
        );
    }

    #[test]
    fn kind_metadata_is_consistent() {
        use std::str::FromStr;
        for kind in MeasureKind::ALL {
            assert_eq!(MeasureKind::from_str(kind.id()).unwrap(), kind);
            assert_eq!(MeasureKind::from_str(&kind.id().to_uppercase()).unwrap(), kind);
            let (lo, hi) = kind.range();
            assert!(lo < hi);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("{:?}", kind.id()));
        }
        assert_eq!(MeasureKind::NLoI.orientation(), Orientation::Divergence);
        assert_eq!(MeasureKind::Mantel.orientation(), Orientation::Similarity);
        assert!(MeasureKind::from_str("euclid").is_err());
        assert_eq!(MeasureKind::WRmse.label(), "wRMSE");
    }

    #[test]
    fn measures_work_in_f32() {
        let o = ProximityMatrix::<f32>::from_pair_values(3, &[0.8, 0.2, 0.6]).unwrap();
        let p = Partition::from_labels(vec![1, 1, 2]).unwrap();
        let ohat = p.to_crisp(&NodeWeights::<f32>::unit()).unwrap();
        assert!((nloi(&o, &ohat).unwrap() - 0.28f32).abs() < 1e-6);
        assert!((hellinger(&o, &ohat).unwrap() - 0.5199826f32).abs() < 1e-6);
    }
}
