//! Symmetric eigendecomposition, Cholesky solves and ridge regularization.
//!
//! Only symmetric machinery lives here. The generalized problem
//! `S_b·v = λ·S_w·v` is reduced to a symmetric one by Cholesky whitening in
//! [`crate::features::lda`].

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Upper bound on cyclic Jacobi sweeps.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative off-diagonal norm at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Relative asymmetry accepted by [`sym_eig`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
///
/// Column `i` of `vectors` is the unit eigenvector for `values[i]`; its first
/// non-negligible component is positive.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
    pub sweeps: usize,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn vector(&self, i: usize) -> Vec<T> {
        self.vectors.column(i)
    }

    /// `V·diag(λ)·Vᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.values.len();
        let scaled = Matrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled
            .matmul(&self.vectors.transpose())
            .expect("square factors")
    }
}

fn check_square<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(())
}

fn check_symmetric<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    check_square(a)?;
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("symmetric matrix"));
    }
    let asym = a.asymmetry();
    if asym > T::tolerance(SYMMETRY_TOLERANCE) * a.max_abs() {
        return Err(Error::NotSymmetric(asym.to_f64_lossy()));
    }
    Ok(())
}

fn off_diagonal_norm<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Flips `v` so that its first component above `tiny` in magnitude is positive.
pub(crate) fn canonical_sign<T: Scalar>(v: &mut [T]) {
    let tiny = T::tolerance(1e-10) * v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if let Some(&first) = v.iter().find(|x| x.abs() > tiny) {
        if first < T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Applies [`canonical_sign`] to every column of `m`.
pub(crate) fn canonicalize_columns<T: Scalar>(m: &mut Matrix<T>) {
    for j in 0..m.cols() {
        let mut col = m.column(j);
        canonical_sign(&mut col);
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm falls to
/// `1e-12·‖A‖_F` or [`MAX_JACOBI_SWEEPS`] sweeps have run.
pub fn sym_eig<T: Scalar>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    check_symmetric(a)?;
    let n = a.rows();
    // symmetrize so rounding noise in the input cannot bias the rotations
    let mut w = Matrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)]) * T::of(0.5));
    let mut v = Matrix::identity(n);
    let target = T::tolerance(JACOBI_TOLERANCE) * a.frobenius_norm();
    let two = T::of(2.0);

    let mut sweeps = 0;
    while sweeps < MAX_JACOBI_SWEEPS && off_diagonal_norm(&w) > target {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (two * apq);
                let t = if theta.is_finite() {
                    let sign = if theta < T::zero() { -T::one() } else { T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                } else {
                    T::zero()
                };
                if t == T::zero() {
                    continue;
                }
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut w, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        w[(j, j)]
            .partial_cmp(&w[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| w[(i, i)]).collect();
    let mut vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    canonicalize_columns(&mut vectors);
    Ok(EigenDecomposition {
        values,
        vectors,
        sweeps,
    })
}

/// `W ← JᵀWJ`, `V ← VJ` for the plane rotation in (p, q).
fn rotate<T: Scalar>(w: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = w.rows();
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = c * wkp - s * wkq;
        w[(k, q)] = s * wkp + c * wkq;
    }
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = c * wpk - s * wqk;
        w[(q, k)] = s * wpk + c * wqk;
    }
    w[(p, q)] = T::zero();
    w[(q, p)] = T::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors `a`; fails with the offending pivot when `a` is not positive definite.
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        check_square(a)?;
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                let (li, lj) = (l.row(i), l.row(j));
                for k in 0..j {
                    s = s - li[k] * lj[k];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    fn check_rhs(&self, b: &Matrix<T>) -> Result<()> {
        if b.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: b.rows(),
            });
        }
        Ok(())
    }

    /// `L⁻¹·B` by forward substitution.
    pub fn solve_lower(&self, b: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_rhs(b)?;
        let n = self.dim();
        let mut x = b.clone();
        for i in 0..n {
            let lii = self.l[(i, i)];
            for k in 0..i {
                let lik = self.l[(i, k)];
                if lik == T::zero() {
                    continue;
                }
                for c in 0..x.cols() {
                    let v = x[(k, c)];
                    x[(i, c)] = x[(i, c)] - lik * v;
                }
            }
            for c in 0..x.cols() {
                x[(i, c)] = x[(i, c)] / lii;
            }
        }
        Ok(x)
    }

    /// `L⁻ᵀ·B` by back substitution.
    pub fn solve_lower_transpose(&self, b: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_rhs(b)?;
        let n = self.dim();
        let mut x = b.clone();
        for i in (0..n).rev() {
            let lii = self.l[(i, i)];
            for k in (i + 1)..n {
                let lki = self.l[(k, i)];
                if lki == T::zero() {
                    continue;
                }
                for c in 0..x.cols() {
                    let v = x[(k, c)];
                    x[(i, c)] = x[(i, c)] - lki * v;
                }
            }
            for c in 0..x.cols() {
                x[(i, c)] = x[(i, c)] / lii;
            }
        }
        Ok(x)
    }

    /// `A⁻¹·B`.
    pub fn solve(&self, b: &Matrix<T>) -> Result<Matrix<T>> {
        self.solve_lower_transpose(&self.solve_lower(b)?)
    }
}

/// Solves `A·X = B` for symmetric positive-definite `A` via Cholesky.
pub fn spd_solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    Cholesky::factor(a)?.solve(b)
}

/// `A + ε·I` with `ε = eps_rel·trace(A)/dim`, or `ε = eps_rel` when the trace is zero.
pub fn ridge_regularize<T: Scalar>(a: &Matrix<T>, eps_rel: T) -> Result<Matrix<T>> {
    check_square(a)?;
    if !(eps_rel > T::zero()) {
        return Err(Error::invalid("ridge eps_rel must be positive"));
    }
    let n = a.rows();
    let tr = a.trace();
    let eps = if tr == T::zero() || n == 0 {
        eps_rel
    } else {
        eps_rel * tr / T::of_usize(n)
    };
    let mut out = a.clone();
    for i in 0..n {
        out[(i, i)] = out[(i, i)] + eps;
    }
    Ok(out)
}
