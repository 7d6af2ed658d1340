//! Paired t-test used to check whether two groups of spectra differ.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::stats::special::student_t_sf;

/// Conventional significance threshold; `p ≤ 0.05` counts as significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTestResult<T> {
    pub t: T,
    pub df: usize,
    /// Two-sided p-value.
    pub p: T,
    pub mean_diff: T,
    /// Sample standard deviation of the differences (m − 1 denominator).
    pub sd_diff: T,
}

impl<T: Scalar> TTestResult<T> {
    pub fn significant(&self, alpha: T) -> bool {
        self.p <= alpha
    }
}

/// Paired t-test on `a[i] − b[i]`.
pub fn paired_t_test<T: Scalar>(a: &[T], b: &[T]) -> Result<TTestResult<T>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::invalid(format!("paired t-test needs at least 2 pairs (got {m})")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("t-test sample"));
    }
    let diffs: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
    let mf = T::of_usize(m);
    let mean = diffs.iter().copied().sum::<T>() / mf;
    let ss = diffs.iter().map(|&d| (d - mean) * (d - mean)).sum::<T>();
    let sd = (ss / T::of_usize(m - 1)).sqrt();
    if !(sd > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    let t = mean / (sd / mf.sqrt());
    let df = m - 1;
    let p = (T::of(2.0) * student_t_sf(t.abs(), T::of_usize(df))?).min(T::one());
    Ok(TTestResult {
        t,
        df,
        p,
        mean_diff: mean,
        sd_diff: sd,
    })
}

/// One paired test per column, pairing row `i` of `a` with row `i` of `b`.
pub fn per_band_paired_t<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Vec<Result<TTestResult<T>>>> {
    check_pairable(a, b)?;
    Ok((0..a.cols())
        .map(|j| paired_t_test(&a.column(j), &b.column(j)))
        .collect())
}

/// Paired test on per-sample mean absorbance (each row averaged over bands).
pub fn mean_spectrum_paired_t<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<TTestResult<T>> {
    check_pairable(a, b)?;
    let row_means = |m: &Matrix<T>| -> Vec<T> {
        m.row_iter()
            .map(|r| r.iter().copied().sum::<T>() / T::of_usize(r.len()))
            .collect()
    };
    paired_t_test(&row_means(a), &row_means(b))
}

fn check_pairable<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: b.rows(),
        });
    }
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: b.cols(),
        });
    }
    Ok(())
}
