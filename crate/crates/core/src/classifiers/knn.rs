//! Brute-force k-nearest-neighbour classification.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Default neighbour count.
pub const DEFAULT_K: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euclidean" => Some(Metric::Euclidean),
            "manhattan" => Some(Metric::Manhattan),
            _ => None,
        }
    }

    pub fn distance<T: Scalar>(self, a: &[T], b: &[T]) -> T {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<T>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum(),
        }
    }
}

/// Stored exemplars; KNN has no fitting step.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnModel<T> {
    pub exemplars: Matrix<T>,
    pub labels: Vec<usize>,
    pub k: usize,
    pub metric: Metric,
}

pub fn fit_knn<T: Scalar>(x: &Matrix<T>, y: &[usize], k: usize, metric: Metric) -> Result<KnnModel<T>> {
    if x.rows() == 0 {
        return Err(Error::Empty("KNN training data"));
    }
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    if k == 0 || k > x.rows() {
        return Err(Error::invalid(format!("k must be in 1..={} (got {k})", x.rows())));
    }
    Ok(KnnModel {
        exemplars: x.clone(),
        labels: y.to_vec(),
        k,
        metric,
    })
}

/// Majority vote among the `k` nearest exemplars.
///
/// Equal distances are ordered by exemplar index. A tied vote goes to the
/// class whose neighbours have the smallest summed distance, then to the
/// lowest class id.
pub fn predict_knn<T: Scalar>(model: &KnnModel<T>, x0: &[T]) -> Result<usize> {
    if x0.len() != model.exemplars.cols() {
        return Err(Error::DimensionMismatch {
            expected: model.exemplars.cols(),
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("KNN query"));
    }
    let mut dists: Vec<(T, usize)> = model
        .exemplars
        .row_iter()
        .enumerate()
        .map(|(i, row)| (model.metric.distance(row, x0), i))
        .collect();
    let by_distance = |a: &(T, usize), b: &(T, usize)| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
    };
    let k = model.k.min(dists.len());
    if k < dists.len() {
        dists.select_nth_unstable_by(k - 1, by_distance);
        dists.truncate(k);
    }
    // fixed summation order for the tie-break sums
    dists.sort_unstable_by(by_distance);

    let n_classes = model.labels.iter().max().map_or(0, |&m| m + 1);
    let mut votes = vec![0usize; n_classes];
    let mut summed = vec![T::zero(); n_classes];
    for &(d, i) in &dists {
        let c = model.labels[i];
        votes[c] += 1;
        summed[c] = summed[c] + d;
    }
    let mut best = 0;
    for c in 1..n_classes {
        if votes[c] > votes[best] || (votes[c] == votes[best] && summed[c] < summed[best]) {
            best = c;
        }
    }
    Ok(best)
}

pub fn predict_knn_batch<T: Scalar>(model: &KnnModel<T>, x: &Matrix<T>) -> Result<Vec<usize>> {
    x.row_iter().map(|r| predict_knn(model, r)).collect()
}
