//! Principal component analysis on the sample covariance.

use crate::error::{Error, Result};
use crate::matrix::{add_outer, Matrix};
use crate::numerics::{canonicalize_columns, sym_eig};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel<T> {
    pub mean: Vec<T>,
    /// d×r, orthonormal columns.
    pub components: Matrix<T>,
    /// Covariance eigenvalues of the kept components, descending.
    pub explained_variance: Vec<T>,
}

impl<T: Scalar> PcaModel<T> {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.cols()
    }
}

fn centered<T: Scalar>(x: &Matrix<T>, mean: &[T]) -> Matrix<T> {
    Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[j])
}

/// Keeps the top `r` principal directions of `x` (covariance normalized by n − 1).
///
/// When there are more columns than rows the n×n Gram matrix is
/// diagonalized instead of the d×d covariance; both give the same nonzero
/// spectrum and directions.
pub fn fit_pca<T: Scalar>(x: &Matrix<T>, r: usize) -> Result<PcaModel<T>> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two samples"));
    }
    if r == 0 || r > (n - 1).min(d) {
        return Err(Error::invalid(format!(
            "PCA components must be in 1..={} (got {r})",
            (n - 1).min(d)
        )));
    }
    let mean = x.column_means();
    let xc = centered(x, &mean);
    let scale = T::one() / T::of_usize(n - 1);

    if d > n {
        if let Some((components, explained_variance)) = gram_route(&xc, r, scale)? {
            return Ok(PcaModel {
                mean,
                components,
                explained_variance,
            });
        }
    }

    let mut cov = Matrix::zeros(d, d);
    for row in xc.row_iter() {
        add_outer(&mut cov, T::one(), row, row);
    }
    let cov = cov.scale(scale);
    let eig = sym_eig(&cov)?;
    let cols: Vec<usize> = (0..r).collect();
    Ok(PcaModel {
        mean,
        components: eig.vectors.select_columns(&cols),
        explained_variance: eig.values[..r].iter().map(|v| v.max(T::zero())).collect(),
    })
}

fn gram_route<T: Scalar>(xc: &Matrix<T>, r: usize, scale: T) -> Result<Option<(Matrix<T>, Vec<T>)>> {
    let gram = xc.matmul(&xc.transpose())?.scale(scale);
    let eig = sym_eig(&gram)?;
    let top = eig.values.first().copied().unwrap_or_else(T::zero);
    let floor = T::tolerance(1e-10) * top;
    if eig.values[..r].iter().any(|&l| !(l > floor)) {
        return Ok(None);
    }
    let d = xc.cols();
    let mut comps = Matrix::zeros(d, r);
    for k in 0..r {
        let u = eig.vector(k);
        // ‖X_cᵀu‖² = (n − 1)·λ
        let inv = T::one() / (eig.values[k] / scale).sqrt();
        for (i, &ui) in u.iter().enumerate() {
            let w = ui * inv;
            for (j, &v) in xc.row(i).iter().enumerate() {
                comps[(j, k)] = comps[(j, k)] + w * v;
            }
        }
    }
    canonicalize_columns(&mut comps);
    Ok(Some((comps, eig.values[..r].to_vec())))
}

/// `Y = (X − mean)·components`.
pub fn transform_pca<T: Scalar>(model: &PcaModel<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    if x.cols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: x.cols(),
        });
    }
    centered(x, &model.mean).matmul(&model.components)
}
