//! Unified permutation test over any set of agreement measures.
//!
//! The null hypothesis is "no association between the fuzzy matrix and the
//! surrogate's structure": the surrogate's rows and columns are reordered by
//! a shared random permutation, which preserves its off-diagonal value
//! multiset and block-size multiset while breaking any alignment with the
//! fuzzy matrix. One set of R permutations is drawn from the seed and every
//! requested measure is evaluated on the same permuted matrix per replicate,
//! so the per-measure reports are mutually comparable.
//!
//! Per measure the report carries the observed statistic, the null mean and
//! SD, a Z-score, a Phipson-Smyth p-value (never zero), and a permutation
//! confidence interval. Divergences count permutations with statistics at or
//! below the observed value, similarities at or above.
//!
//! Replicates draw from per-replicate ChaCha substreams keyed by (seed,
//! replicate), so reports are bit-identical across thread counts and
//! schedules. Three internal evaluation paths trade generality for speed (a
//! binary-surrogate edge walk, a fused per-pair loop, and a materializing
//! fallback used when SSIM is requested); the path is chosen from the inputs
//! alone, never from the thread count.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{cast_count, ProximityMatrix, Scalar};
use crate::measures::{
    evaluate, MeasureError, MeasureKind, MeasureParams, Orientation,
};

/// How the surrogate is randomized under the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationScheme {
    /// Simultaneous row/column reordering. Preserves the block-diagonal
    /// structure of a crisp matrix; this is the inference-valid scheme.
    #[default]
    RowColumn,
    /// Independent shuffle of the packed off-diagonal values. Destroys block
    /// structure; exposed only for scheme-sensitivity comparisons and not
    /// valid for inference.
    ValueShuffle,
}

/// Configuration for [`run_permutation_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct PermTestConfig<T> {
    /// Number of random permutations R.
    pub permutations: usize,
    /// Significance level in (0, 1); rejection is p < alpha, strictly.
    pub alpha: f64,
    /// Seed for the permutation stream.
    pub seed: u64,
    /// Measures evaluated on the shared permutation set.
    pub measures: Vec<MeasureKind>,
    pub scheme: PermutationScheme,
    pub params: MeasureParams<T>,
    /// Retain the per-measure null sample vectors in the report.
    pub keep_null_samples: bool,
}

impl<T: Scalar> PermTestConfig<T> {
    /// R = 999, alpha = 0.05, all six measures, row/column permutation.
    pub fn new(seed: u64) -> Self {
        Self {
            permutations: 999,
            alpha: 0.05,
            seed,
            measures: MeasureKind::ALL.to_vec(),
            scheme: PermutationScheme::RowColumn,
            params: MeasureParams::default(),
            keep_null_samples: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermTestError {
    #[error("permutation count must be at least 1")]
    ZeroPermutations,
    #[error("alpha must lie strictly between 0 and 1")]
    InvalidAlpha,
    #[error("at least one measure is required")]
    NoMeasures,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// One measure's row of the permutation-test report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport<T> {
    #[serde(rename = "measure")]
    pub kind: MeasureKind,
    pub orientation: Orientation,
    pub observed: T,
    pub null_mean: T,
    pub null_sd: T,
    /// `(observed - null_mean) / null_sd`; `None` when the null SD is zero.
    pub z: Option<T>,
    /// Phipson-Smyth p-value in [1/(R+1), 1].
    pub p: T,
    pub ci_lower: T,
    pub ci_upper: T,
    /// Whether p < alpha, strictly.
    pub rejected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_samples: Option<Vec<T>>,
}

/// Full result of one permutation test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport<T> {
    pub n: usize,
    pub permutations: usize,
    pub alpha: f64,
    pub seed: u64,
    pub scheme: PermutationScheme,
    pub measures: Vec<MeasureReport<T>>,
}

/// Phipson-Smyth permutation p-value, (1 + count) / (1 + R): the observed
/// arrangement counts as one more realization of the null, so p is never 0.
pub fn phipson_smyth_p<T: Scalar>(count_extreme: usize, permutations: usize) -> T {
    debug_assert!(count_extreme <= permutations);
    cast_count::<T>(1 + count_extreme) / cast_count::<T>(1 + permutations)
}

/// Number of null statistics at least as favorable to agreement as the
/// observed one: at or below it for divergences, at or above for
/// similarities.
pub fn count_extreme<T: Scalar>(
    observed: T,
    null_samples: &[T],
    orientation: Orientation,
) -> usize {
    match orientation {
        Orientation::Divergence => null_samples.iter().filter(|&&t| t <= observed).count(),
        Orientation::Similarity => null_samples.iter().filter(|&&t| t >= observed).count(),
    }
}

/// Sample quantile with linear interpolation between order statistics: the
/// value at fractional 0-based rank (len - 1) * q. `sorted` must be ascending
/// and nonempty; q must lie in [0, 1].
pub fn quantile_linear<T: Scalar>(sorted: &[T], q: f64) -> T {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::from_f64(h - lo as f64).unwrap();
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Permutation confidence interval for the offset between the observed
/// statistic and the null's location: the reverse-percentile interval
/// observed + (null mean - Q), with Q at 1 - alpha/2 for the lower bound and
/// alpha/2 for the upper, both ends clamped into `range`. Clamping both ends
/// with the same monotone map keeps lower <= upper.
pub fn permutation_ci<T: Scalar>(
    observed: T,
    null_samples: &[T],
    alpha: f64,
    range: (T, T),
) -> (T, T) {
    debug_assert!(!null_samples.is_empty());
    let mut sorted = null_samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("statistics are never NaN"));
    // A zero-spread null must collapse the interval to the observed value
    // exactly, so the mean of identical samples is taken without division.
    let mean = if sorted[0] == sorted[sorted.len() - 1] {
        sorted[0]
    } else {
        sorted.iter().copied().sum::<T>() / cast_count::<T>(sorted.len())
    };
    let q_hi = quantile_linear(&sorted, 1.0 - alpha / 2.0);
    let q_lo = quantile_linear(&sorted, alpha / 2.0);
    // Grouping as observed + (mean - q) keeps the interval exactly at the
    // observed value when the null has zero spread.
    let lower = observed + (mean - q_hi);
    let upper = observed + (mean - q_lo);
    let clamp = |v: T| v.max(range.0).min(range.1);
    (clamp(lower), clamp(upper))
}

/// Runs the unified permutation test: draws R shared permutations from the
/// seed, evaluates every configured measure on each permuted surrogate, and
/// assembles per-measure reports. The observed statistics come from the same
/// evaluation path with the identity permutation, so exact ties between the
/// observed and null statistics are detected reliably.
pub fn run_permutation_test<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    cfg: &PermTestConfig<T>,
) -> Result<TestReport<T>, PermTestError> {
    if cfg.permutations == 0 {
        return Err(PermTestError::ZeroPermutations);
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(PermTestError::InvalidAlpha);
    }
    if cfg.measures.is_empty() {
        return Err(PermTestError::NoMeasures);
    }
    if o.n() != ohat.n() {
        return Err(MeasureError::DimensionMismatch { left: o.n(), right: ohat.n() }.into());
    }
    precheck_degeneracy(o, ohat, &cfg.measures)?;
    if cfg.measures.contains(&MeasureKind::Ssim) {
        // Validate the window once; the engines assume it afterwards.
        let w = cfg.params.effective_ssim_window(o.n());
        if w == 0 {
            return Err(MeasureError::ZeroWindow.into());
        }
        if w > o.n() {
            return Err(MeasureError::WindowTooLarge { window: w, n: o.n() }.into());
        }
    }

    let (observed, samples) = dispatch_engines(o, ohat, cfg);

    let alpha_t = T::from_f64(cfg.alpha).unwrap();
    let measures = cfg
        .measures
        .iter()
        .zip(observed)
        .zip(samples)
        .map(|((&kind, obs), null)| summarize(kind, obs, null, cfg.alpha, alpha_t, cfg.keep_null_samples))
        .collect();
    Ok(TestReport {
        n: o.n(),
        permutations: cfg.permutations,
        alpha: cfg.alpha,
        seed: cfg.seed,
        scheme: cfg.scheme,
        measures,
    })
}

/// RV and Mantel are undefined on degenerate inputs regardless of the
/// permutation; both conditions depend only on value multisets, which every
/// permutation preserves, so checking the inputs once covers all replicates.
fn precheck_degeneracy<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    measures: &[MeasureKind],
) -> Result<(), MeasureError> {
    if measures.contains(&MeasureKind::Rv) {
        for m in [o, ohat] {
            if m.pairs().all(|(_, _, v)| v == T::zero()) {
                return Err(MeasureError::DegenerateMatrix(
                    "a matrix with all-zero off-diagonal entries has no RV direction",
                ));
            }
        }
    }
    if measures.contains(&MeasureKind::Mantel) {
        for m in [o, ohat] {
            let first = m.get(0, 1);
            if m.pairs().all(|(_, _, v)| v == first) {
                return Err(MeasureError::DegenerateMatrix(
                    "a matrix with constant off-diagonal entries has no Mantel correlation",
                ));
            }
        }
    }
    Ok(())
}

fn summarize<T: Scalar>(
    kind: MeasureKind,
    observed: T,
    null: Vec<T>,
    alpha: f64,
    alpha_t: T,
    keep: bool,
) -> MeasureReport<T> {
    let r = null.len();
    // An all-tied null has SD exactly zero; computing it through the mean
    // would leave rounding residue and spuriously define Z.
    let all_equal = null.iter().all(|&t| t == null[0]);
    let null_mean = if all_equal {
        null[0]
    } else {
        null.iter().copied().sum::<T>() / cast_count::<T>(r)
    };
    let null_sd = if all_equal || r < 2 {
        T::zero()
    } else {
        let ss = null
            .iter()
            .map(|&t| {
                let d = t - null_mean;
                d * d
            })
            .sum::<T>();
        (ss / cast_count::<T>(r - 1)).sqrt()
    };
    let orientation = kind.orientation();
    let count = count_extreme(observed, &null, orientation);
    let p = phipson_smyth_p::<T>(count, r);
    let z = (null_sd > T::zero()).then(|| (observed - null_mean) / null_sd);
    let (lo, hi) = kind.range();
    let range = (T::from_f64(lo).unwrap(), T::from_f64(hi).unwrap());
    let (ci_lower, ci_upper) = permutation_ci(observed, &null, alpha, range);
    MeasureReport {
        kind,
        orientation,
        observed,
        null_mean,
        null_sd,
        z,
        p,
        rejected: p < alpha_t,
        ci_lower,
        ci_upper,
        null_samples: keep.then_some(null),
    }
}

/// Per-replicate RNG: one independent ChaCha stream per replicate index, all
/// keyed by the config seed. Replicate r always sees the same stream no
/// matter which thread runs it.
fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Runs `per_replicate` for r in 0..R in parallel, preserving replicate
/// order, then transposes into one sample vector per measure. Collection
/// order is fixed by the replicate index, so aggregate results do not depend
/// on thread count.
fn collect_replicates<T: Scalar>(
    permutations: usize,
    n_measures: usize,
    per_replicate: impl Fn(usize) -> Vec<T> + Sync + Send,
) -> Vec<Vec<T>> {
    let rows: Vec<Vec<T>> = (0..permutations)
        .into_par_iter()
        .with_min_len(16)
        .map(per_replicate)
        .collect();
    let mut samples = vec![Vec::with_capacity(permutations); n_measures];
    for row in rows {
        debug_assert_eq!(row.len(), n_measures);
        for (m, v) in row.into_iter().enumerate() {
            samples[m].push(v);
        }
    }
    samples
}

fn dispatch_engines<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    cfg: &PermTestConfig<T>,
) -> (Vec<T>, Vec<Vec<T>>) {
    if cfg.measures.contains(&MeasureKind::Ssim) {
        return full_engine(o, ohat, cfg);
    }
    if cfg.scheme == PermutationScheme::RowColumn && is_binary(ohat) {
        return crisp_engine(o, ohat, cfg);
    }
    pair_engine(o, ohat, cfg)
}

fn is_binary<T: Scalar>(m: &ProximityMatrix<T>) -> bool {
    m.pairs().all(|(_, _, v)| v == T::zero() || v == T::one())
}

fn identity_perm(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn draw_row_col_perm(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm = identity_perm(n);
    perm.shuffle(rng);
    perm
}

/// Fallback engine: materializes each permuted surrogate and runs the
/// standalone evaluators. The only path that can serve SSIM, whose windows
/// need the full matrix layout.
fn full_engine<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    cfg: &PermTestConfig<T>,
) -> (Vec<T>, Vec<Vec<T>>) {
    let n = o.n();
    let eval_all = |surrogate: &ProximityMatrix<T>| -> Vec<T> {
        cfg.measures
            .iter()
            .map(|&kind| {
                evaluate(kind, o, surrogate, &cfg.params)
                    .expect("null surrogate shares the validated inputs' dimensions and multisets")
            })
            .collect()
    };
    let observed = eval_all(ohat);
    let packed = ohat.pair_values();
    let samples = collect_replicates(cfg.permutations, cfg.measures.len(), |r| {
        let mut rng = replicate_rng(cfg.seed, r);
        let permuted = match cfg.scheme {
            PermutationScheme::RowColumn => {
                let perm = draw_row_col_perm(&mut rng, n);
                ohat.permuted(&perm).expect("generated permutation is a bijection")
            }
            PermutationScheme::ValueShuffle => {
                let mut values = packed.clone();
                values.shuffle(&mut rng);
                ProximityMatrix::from_pair_values(n, &values)
                    .expect("shuffled values come from a valid matrix")
            }
        };
        eval_all(&permuted)
    });
    (observed, samples)
}

/// Shared fused-loop accumulators; one pass over all M pairs yields every
/// non-SSIM statistic at once.
struct PairSums<T> {
    loi: T,
    hell: T,
    wnum: T,
    wden: T,
    cross: T,
    mantel_num: T,
}

/// Precomputed pair data for the fused engine. Centered copies make the
/// Mantel numerator a single dot product with a permutation-invariant
/// denominator.
struct PairPre<'a, T> {
    n: usize,
    /// Packed upper-triangle fuzzy values, their square roots, and their
    /// centered residuals.
    ov: Vec<T>,
    so: Vec<T>,
    ca: Vec<T>,
    /// Dense surrogate plus aligned square roots and centered residuals for
    /// O(1) permuted lookup.
    bd: &'a [T],
    sbd: Vec<T>,
    cbd: Vec<T>,
    /// Packed surrogate views for the value-shuffle scheme.
    bv: Vec<T>,
    sbv: Vec<T>,
    cbv: Vec<T>,
    /// Permutation-invariant normalizers.
    m: T,
    rv_den: T,
    mantel_den: T,
}

impl<'a, T: Scalar> PairPre<'a, T> {
    fn new(o: &ProximityMatrix<T>, ohat: &'a ProximityMatrix<T>) -> Self {
        let n = o.n();
        let m_count = o.pair_count();
        let m = cast_count::<T>(m_count);

        let ov = o.pair_values();
        let so: Vec<T> = ov.iter().map(|&v| v.sqrt()).collect();
        let mean_a = ov.iter().copied().sum::<T>() / m;
        let ca: Vec<T> = ov.iter().map(|&v| v - mean_a).collect();

        let bd = ohat.values();
        let bv = ohat.pair_values();
        let sbv: Vec<T> = bv.iter().map(|&v| v.sqrt()).collect();
        let mean_b = bv.iter().copied().sum::<T>() / m;
        let cbv: Vec<T> = bv.iter().map(|&v| v - mean_b).collect();
        let sbd: Vec<T> = bd.iter().map(|&v| v.sqrt()).collect();
        let cbd: Vec<T> = bd.iter().map(|&v| v - mean_b).collect();

        let s2a = ov.iter().map(|&v| v * v).sum::<T>();
        let s2b = bv.iter().map(|&v| v * v).sum::<T>();
        let sa2c = ca.iter().map(|&v| v * v).sum::<T>();
        let sb2c = cbv.iter().map(|&v| v * v).sum::<T>();

        Self {
            n,
            ov,
            so,
            ca,
            bd,
            sbd,
            cbd,
            bv,
            sbv,
            cbv,
            m,
            rv_den: (s2a * s2b).sqrt(),
            mantel_den: (sa2c * sb2c).sqrt(),
        }
    }

    fn accumulate_rowcol(&self, perm: &[usize], epsilon: T) -> PairSums<T> {
        let n = self.n;
        let zero = T::zero();
        let mut s = PairSums {
            loi: zero,
            hell: zero,
            wnum: zero,
            wden: zero,
            cross: zero,
            mantel_num: zero,
        };
        let mut idx = 0usize;
        for i in 0..n {
            let pi = perm[i] * n;
            for &pj in &perm[(i + 1)..n] {
                let b = self.bd[pi + pj];
                let sb = self.sbd[pi + pj];
                let cb = self.cbd[pi + pj];
                let a = self.ov[idx];
                let sa = self.so[idx];
                let cav = self.ca[idx];
                idx += 1;
                accumulate_pair(&mut s, a, sa, cav, b, sb, cb, epsilon);
            }
        }
        s
    }

    fn accumulate_shuffled(&self, order: &[u32], epsilon: T) -> PairSums<T> {
        let zero = T::zero();
        let mut s = PairSums {
            loi: zero,
            hell: zero,
            wnum: zero,
            wden: zero,
            cross: zero,
            mantel_num: zero,
        };
        for (idx, &k) in order.iter().enumerate() {
            let k = k as usize;
            accumulate_pair(
                &mut s,
                self.ov[idx],
                self.so[idx],
                self.ca[idx],
                self.bv[k],
                self.sbv[k],
                self.cbv[k],
                epsilon,
            );
        }
        s
    }

    fn stats(&self, s: &PairSums<T>, measures: &[MeasureKind]) -> Vec<T> {
        let zero = T::zero();
        let one = T::one();
        measures
            .iter()
            .map(|kind| match kind {
                MeasureKind::NLoI => (s.loi / self.m).max(zero).min(one),
                MeasureKind::Hellinger => (s.hell / self.m).max(zero).sqrt().min(one),
                MeasureKind::WRmse => (s.wnum / s.wden).max(zero).sqrt().min(one),
                MeasureKind::Rv => (s.cross / self.rv_den).max(zero).min(one),
                MeasureKind::Mantel => (s.mantel_num / self.mantel_den).max(-one).min(one),
                MeasureKind::Ssim => unreachable!("SSIM is served by the materializing engine"),
            })
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn accumulate_pair<T: Scalar>(
    s: &mut PairSums<T>,
    a: T,
    sa: T,
    cav: T,
    b: T,
    sb: T,
    cb: T,
    epsilon: T,
) {
    let d = a - b;
    let mx = a.max(b);
    if mx > T::zero() {
        s.loi = s.loi + d * d / mx;
    }
    let hd = sa - sb;
    s.hell = s.hell + hd * hd;
    let w = mx.max(epsilon);
    s.wnum = s.wnum + w * (d * d);
    s.wden = s.wden + w;
    s.cross = s.cross + a * b;
    s.mantel_num = s.mantel_num + cav * cb;
}

/// Fused per-pair engine for fuzzy surrogates (and all value-shuffle runs):
/// one O(M) pass per replicate with no materialized matrix.
fn pair_engine<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    cfg: &PermTestConfig<T>,
) -> (Vec<T>, Vec<Vec<T>>) {
    let pre = PairPre::new(o, ohat);
    let eps = cfg.params.epsilon;
    let observed = pre.stats(&pre.accumulate_rowcol(&identity_perm(pre.n), eps), &cfg.measures);
    let samples = collect_replicates(cfg.permutations, cfg.measures.len(), |r| {
        let mut rng = replicate_rng(cfg.seed, r);
        let sums = match cfg.scheme {
            PermutationScheme::RowColumn => {
                let perm = draw_row_col_perm(&mut rng, pre.n);
                pre.accumulate_rowcol(&perm, eps)
            }
            PermutationScheme::ValueShuffle => {
                let mut order: Vec<u32> = (0..pre.ov.len() as u32).collect();
                order.shuffle(&mut rng);
                pre.accumulate_shuffled(&order, eps)
            }
        };
        pre.stats(&sums, &cfg.measures)
    });
    (observed, samples)
}

/// Precomputed state for binary surrogates under row/column permutation.
/// Only within-block pairs of the surrogate contribute non-invariant terms,
/// so each replicate walks the surrogate's edge list (about M/K pairs)
/// instead of all M pairs; everything else collapses into constants.
struct CrispPre<'a, T> {
    n: usize,
    od: &'a [T],
    /// Dense square roots of the fuzzy matrix, aligned with `od`.
    sqa: Vec<T>,
    /// Within-block pairs (u, v), u < v, of the unpermuted surrogate.
    edges: Vec<(u32, u32)>,
    m: T,
    ef: T,
    mean_a: T,
    /// Invariant whole-matrix sums of the fuzzy side.
    s1: T,
    g_all: T,
    mx_all: T,
    ca1: T,
    mean_b: T,
    rv_den: T,
    mantel_den: T,
    epsilon: T,
}

/// Per-replicate accumulators over the surrogate's edges, gathered through
/// the inverse permutation.
struct CrispSums<T> {
    t1: T,
    t2: T,
    t3: T,
    t4: T,
    tg: T,
    tc: T,
}

impl<'a, T: Scalar> CrispPre<'a, T> {
    fn new(o: &'a ProximityMatrix<T>, ohat: &ProximityMatrix<T>, epsilon: T) -> Self {
        let n = o.n();
        let m_count = o.pair_count();
        let m = cast_count::<T>(m_count);
        let od = o.values();
        let sqa: Vec<T> = od.iter().map(|&v| v.sqrt()).collect();
        let edges: Vec<(u32, u32)> = ohat
            .pairs()
            .filter(|&(_, _, v)| v == T::one())
            .map(|(i, j, _)| (i as u32, j as u32))
            .collect();
        let ef = cast_count::<T>(edges.len());

        let mut s1 = T::zero();
        let mut s2 = T::zero();
        let mut g_all = T::zero();
        let mut mx_all = T::zero();
        for (_, _, a) in o.pairs() {
            s1 = s1 + a;
            s2 = s2 + a * a;
            let w = a.max(epsilon);
            g_all = g_all + w * (a * a);
            mx_all = mx_all + w;
        }
        let mean_a = s1 / m;
        let mut ca1 = T::zero();
        let mut sa2c = T::zero();
        for (_, _, a) in o.pairs() {
            let c = a - mean_a;
            ca1 = ca1 + c;
            sa2c = sa2c + c * c;
        }
        let mean_b = ef / m;
        let one = T::one();
        let cw = one - mean_b;
        let sb2c = ef * (cw * cw) + (m - ef) * (mean_b * mean_b);

        Self {
            n,
            od,
            sqa,
            edges,
            m,
            ef,
            mean_a,
            s1,
            g_all,
            mx_all,
            ca1,
            mean_b,
            rv_den: (s2 * ef).sqrt(),
            mantel_den: (sa2c * sb2c).sqrt(),
            epsilon,
        }
    }

    /// Walks the edge list through the inverse permutation: surrogate edge
    /// (u, v) meets fuzzy pair (inv[u], inv[v]), which makes the effective
    /// permuted surrogate identical to the other engines' for the same draw.
    fn accumulate(&self, inv: &[usize]) -> CrispSums<T> {
        let n = self.n;
        let zero = T::zero();
        let mut s = CrispSums { t1: zero, t2: zero, t3: zero, t4: zero, tg: zero, tc: zero };
        for &(u, v) in &self.edges {
            let idx = inv[u as usize] * n + inv[v as usize];
            let a = self.od[idx];
            s.t1 = s.t1 + a;
            s.t2 = s.t2 + a * a;
            s.t3 = s.t3 + self.sqa[idx];
            let w = a.max(self.epsilon);
            s.t4 = s.t4 + w;
            s.tg = s.tg + w * (a * a);
            s.tc = s.tc + (a - self.mean_a);
        }
        s
    }

    fn stats(&self, s: &CrispSums<T>, measures: &[MeasureKind]) -> Vec<T> {
        let zero = T::zero();
        let one = T::one();
        let two = one + one;
        // Within-block pairs contribute (a - 1)-style terms; the remaining
        // pairs contribute whole-matrix sums minus the edge sums.
        let loi = (s.t2 - two * s.t1 + self.ef) + (self.s1 - s.t1);
        let hell = (s.t1 - two * s.t3 + self.ef) + (self.s1 - s.t1);
        let wnum = (s.t2 - two * s.t1 + self.ef) + (self.g_all - s.tg);
        let wden = self.ef + (self.mx_all - s.t4);
        let mantel_num = s.tc - self.mean_b * self.ca1;
        measures
            .iter()
            .map(|kind| match kind {
                MeasureKind::NLoI => (loi / self.m).max(zero).min(one),
                MeasureKind::Hellinger => (hell / self.m).max(zero).sqrt().min(one),
                MeasureKind::WRmse => (wnum / wden).max(zero).sqrt().min(one),
                MeasureKind::Rv => (s.t1 / self.rv_den).max(zero).min(one),
                MeasureKind::Mantel => (mantel_num / self.mantel_den).max(-one).min(one),
                MeasureKind::Ssim => unreachable!("SSIM is served by the materializing engine"),
            })
            .collect()
    }
}

/// Edge-walk engine for binary surrogates under row/column permutation.
fn crisp_engine<T: Scalar>(
    o: &ProximityMatrix<T>,
    ohat: &ProximityMatrix<T>,
    cfg: &PermTestConfig<T>,
) -> (Vec<T>, Vec<Vec<T>>) {
    let pre = CrispPre::new(o, ohat, cfg.params.epsilon);
    let observed = pre.stats(&pre.accumulate(&identity_perm(pre.n)), &cfg.measures);
    let samples = collect_replicates(cfg.permutations, cfg.measures.len(), |r| {
        let mut rng = replicate_rng(cfg.seed, r);
        let perm = draw_row_col_perm(&mut rng, pre.n);
        let mut inv = vec![0usize; pre.n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        pre.stats(&pre.accumulate(&inv), &cfg.measures)
    });
    (observed, samples)
}
