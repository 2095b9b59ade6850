//! Sliding-window structural similarity over summed-area tables.
//!
//! Five cumulative tables (a, b, a*a, b*b, a*b) make every window's moments
//! an O(1) inclusion-exclusion lookup, so the whole pass over all stride-1,
//! fully interior windows costs O(n^2) regardless of window size.

use crate::matrix::{cast_count, Scalar};

/// Mean SSIM over all fully interior w x w windows of two dense row-major
/// n x n images. Caller guarantees 1 <= w <= n and equal dimensions.
///
/// Every arithmetic step is either commutative in (a, b) or evaluated in a
/// swap-independent order, so the result is bitwise identical under argument
/// exchange.
pub(crate) fn ssim_mean<T: Scalar>(a: &[T], b: &[T], n: usize, w: usize, c1: T, c2: T) -> T {
    debug_assert!(w >= 1 && w <= n);
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n * n);

    // Tables are (n + 1) x (n + 1) with a zero top row and left column:
    // cum[(i + 1) * m + (j + 1)] holds the sum over rows <= i, cols <= j.
    let m = n + 1;
    let mut sa = vec![T::zero(); m * m];
    let mut sb = vec![T::zero(); m * m];
    let mut saa = vec![T::zero(); m * m];
    let mut sbb = vec![T::zero(); m * m];
    let mut sab = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let va = a[i * n + j];
            let vb = b[i * n + j];
            let idx = (i + 1) * m + (j + 1);
            let up = i * m + (j + 1);
            let left = (i + 1) * m + j;
            let diag = i * m + j;
            sa[idx] = va + sa[up] + sa[left] - sa[diag];
            sb[idx] = vb + sb[up] + sb[left] - sb[diag];
            saa[idx] = va * va + saa[up] + saa[left] - saa[diag];
            sbb[idx] = vb * vb + sbb[up] + sbb[left] - sbb[diag];
            sab[idx] = va * vb + sab[up] + sab[left] - sab[diag];
        }
    }

    let count = cast_count::<T>(w * w);
    let two = T::one() + T::one();
    let span = n - w + 1;
    let mut total = T::zero();
    for i in 0..span {
        for j in 0..span {
            let lo = i * m + j;
            let hi = (i + w) * m + (j + w);
            let top = i * m + (j + w);
            let bot = (i + w) * m + j;
            let window = |s: &[T]| s[hi] - s[top] - s[bot] + s[lo];

            let mu_a = window(&sa) / count;
            let mu_b = window(&sb) / count;
            // Population variance; the raw-moment form can dip a few ulps
            // below zero, which c2 > 0 absorbs in the denominator.
            let var_a = window(&saa) / count - mu_a * mu_a;
            let var_b = window(&sbb) / count - mu_b * mu_b;
            let cov = window(&sab) / count - mu_a * mu_b;

            let num = (two * mu_a * mu_b + c1) * (two * cov + c2);
            let den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total = total + num / den;
        }
    }
    total / cast_count::<T>(span * span)
}
