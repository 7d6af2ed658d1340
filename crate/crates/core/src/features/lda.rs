//! Linear discriminant analysis.
//!
//! Fitting follows the usual recipe: global and class means, within- and
//! between-class scatter, then the leading eigenpairs of `S_w⁻¹·S_b`.
//! `S_w⁻¹·S_b` is never formed. The equivalent symmetric problem
//! `L⁻¹·S_b·L⁻ᵀ` with `S_w = L·Lᵀ` is solved instead, and its eigenvectors
//! are mapped back through `L⁻ᵀ`.

use crate::data::SpectralDataset;
use crate::error::{Error, Result};
use crate::matrix::{add_outer, Matrix};
use crate::numerics::{canonical_sign, ridge_regularize, sym_eig, Cholesky, EigenDecomposition};
use crate::scalar::Scalar;

/// Default relative ridge added to the within-class scatter.
pub const DEFAULT_RIDGE_EPS_REL: f64 = 1e-6;

/// Above this dimension the generalized problem is solved through the
/// rank-(c) factor of `S_b` instead of a full d×d eigendecomposition.
pub const FULL_EIGEN_MAX_DIM: usize = 64;

/// Means, counts and priors per class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassStatistics<T> {
    pub global_mean: Vec<T>,
    /// c×d, row j is the mean of class j.
    pub class_means: Matrix<T>,
    pub class_counts: Vec<usize>,
    pub priors: Vec<T>,
}

impl<T: Scalar> ClassStatistics<T> {
    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn dim(&self) -> usize {
        self.global_mean.len()
    }

    pub fn n_samples(&self) -> usize {
        self.class_counts.iter().sum()
    }

    /// d×c matrix whose column j is `√p_j·(μ_j − μ)`, so that `S_b = F·Fᵀ`.
    pub fn between_factor(&self) -> Matrix<T> {
        Matrix::from_fn(self.dim(), self.n_classes(), |i, j| {
            self.priors[j].sqrt() * (self.class_means[(j, i)] - self.global_mean[i])
        })
    }
}

/// Within-class (`s_w`) and between-class (`s_b`) scatter.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPair<T> {
    pub s_w: Matrix<T>,
    pub s_b: Matrix<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LdaVariant {
    /// One shared within-class scatter and one projection.
    #[default]
    ClassIndependent,
    /// One within-class scatter and projection per class; the transform
    /// concatenates the per-class projections.
    ClassDependent,
}

impl LdaVariant {
    pub fn name(self) -> &'static str {
        match self {
            LdaVariant::ClassIndependent => "class-independent",
            LdaVariant::ClassDependent => "class-dependent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "class-independent" => Some(LdaVariant::ClassIndependent),
            "class-dependent" => Some(LdaVariant::ClassDependent),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdaConfig<T> {
    /// Discriminant components to keep; `None` keeps `min(c − 1, d)`.
    pub components: Option<usize>,
    pub ridge_eps_rel: T,
    pub variant: LdaVariant,
}

impl<T: Scalar> Default for LdaConfig<T> {
    fn default() -> Self {
        Self {
            components: None,
            ridge_eps_rel: T::of(DEFAULT_RIDGE_EPS_REL),
            variant: LdaVariant::ClassIndependent,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdaModel<T> {
    pub stats: ClassStatistics<T>,
    /// d×m transformation; m = r for the class-independent variant and c·r
    /// for the class-dependent one.
    pub projection: Matrix<T>,
    /// Discriminant values matching the projection columns, descending
    /// within each class block.
    pub eigenvalues: Vec<T>,
    pub components: usize,
    pub variant: LdaVariant,
    pub ridge_eps_rel: T,
}

impl<T: Scalar> LdaModel<T> {
    pub fn input_dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.projection.cols()
    }
}

/// Global mean, class means, counts and priors `n_j / N`.
pub fn class_statistics<T: Scalar>(ds: &SpectralDataset<T>) -> Result<ClassStatistics<T>> {
    let c = ds.n_classes();
    let d = ds.n_features();
    let n = ds.n_samples();
    let counts = ds.class_counts();
    if let Some(empty) = counts.iter().position(|&k| k == 0) {
        return Err(Error::EmptyClass(empty));
    }
    let mut sums = Matrix::zeros(c, d);
    for (row, &cls) in ds.x().row_iter().zip(ds.y()) {
        for (s, &v) in sums.row_mut(cls).iter_mut().zip(row) {
            *s = *s + v;
        }
    }
    let class_means = Matrix::from_fn(c, d, |j, i| sums[(j, i)] / T::of_usize(counts[j]));
    let nf = T::of_usize(n);
    let global_mean = (0..d)
        .map(|i| (0..c).map(|j| sums[(j, i)]).sum::<T>() / nf)
        .collect();
    let priors = counts.iter().map(|&k| T::of_usize(k) / nf).collect();
    Ok(ClassStatistics {
        global_mean,
        class_means,
        class_counts: counts,
        priors,
    })
}

/// `s_w = Σ_j p_j·(1/n_j)·Σ_{x∈ω_j}(x − μ_j)(x − μ_j)ᵀ`,
/// `s_b = Σ_j p_j·(μ_j − μ)(μ_j − μ)ᵀ`.
pub fn scatter_matrices<T: Scalar>(ds: &SpectralDataset<T>, stats: &ClassStatistics<T>) -> Result<ScatterPair<T>> {
    if stats.dim() != ds.n_features() || stats.n_classes() != ds.n_classes() {
        return Err(Error::DimensionMismatch {
            expected: stats.dim(),
            found: ds.n_features(),
        });
    }
    let d = ds.n_features();
    let mut s_w = Matrix::zeros(d, d);
    let mut z = vec![T::zero(); d];
    for (row, &cls) in ds.x().row_iter().zip(ds.y()) {
        // √(p_j / n_j) folded into z keeps every outer product exactly symmetric
        let w = (stats.priors[cls] / T::of_usize(stats.class_counts[cls])).sqrt();
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = w * (row[k] - stats.class_means[(cls, k)]);
        }
        add_outer(&mut s_w, T::one(), &z, &z);
    }
    let f = stats.between_factor();
    let s_b = f.matmul(&f.transpose())?;
    Ok(ScatterPair { s_w, s_b })
}

/// All eigenpairs of `a·v = λ·b·v` for symmetric `a` and SPD `b`, via the
/// whitened matrix `L⁻¹·a·L⁻ᵀ`. Eigenvectors satisfy `vᵀ·b·v = 1`.
pub fn whitened_generalized_eig<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let chol = Cholesky::factor(b)?;
    let half = chol.solve_lower(a)?; // L⁻¹·a
    let whitened = chol.solve_lower(&half.transpose())?; // L⁻¹·(L⁻¹·a)ᵀ = L⁻¹·a·L⁻ᵀ
    let n = whitened.rows();
    let sym = Matrix::from_fn(n, n, |i, j| (whitened[(i, j)] + whitened[(j, i)]) * T::of(0.5));
    let eig = sym_eig(&sym)?;
    let mut vectors = chol.solve_lower_transpose(&eig.vectors)?;
    canonicalize(&mut vectors);
    Ok(EigenDecomposition {
        values: eig.values,
        vectors,
        sweeps: eig.sweeps,
    })
}

/// Leading `r` eigenpairs of `F·Fᵀ·v = λ·b·v` using the c×c Gram matrix of
/// `M = L⁻¹·F`. Returns `None` when one of the requested eigenvalues is
/// numerically zero, in which case its eigenvector is not recoverable from
/// the factor.
pub fn low_rank_generalized_eig<T: Scalar>(
    factor: &Matrix<T>,
    b: &Matrix<T>,
    r: usize,
) -> Result<Option<(Vec<T>, Matrix<T>)>> {
    let chol = Cholesky::factor(b)?;
    let m = chol.solve_lower(factor)?;
    let gram = m.transpose().matmul(&m)?;
    let eig = sym_eig(&gram)?;
    if r > eig.values.len() {
        return Ok(None);
    }
    let top = eig.values.first().copied().unwrap_or_else(T::zero);
    let floor = T::tolerance(1e-10) * top;
    if eig.values[..r].iter().any(|&l| !(l > floor)) {
        return Ok(None);
    }
    let mut u = Matrix::zeros(m.rows(), r);
    for k in 0..r {
        let w = eig.vector(k);
        let inv = T::one() / eig.values[k].sqrt();
        for i in 0..m.rows() {
            u[(i, k)] = crate::matrix::dot(m.row(i), &w) * inv;
        }
    }
    let mut v = chol.solve_lower_transpose(&u)?;
    canonicalize(&mut v);
    Ok(Some((eig.values[..r].to_vec(), v)))
}

fn canonicalize<T: Scalar>(v: &mut Matrix<T>) {
    for j in 0..v.cols() {
        let mut col = v.column(j);
        canonical_sign(&mut col);
        for (i, x) in col.into_iter().enumerate() {
            v[(i, j)] = x;
        }
    }
}

/// Top `r` generalized eigenpairs of `(s_b, s_w_reg)`.
fn discriminants<T: Scalar>(
    s_b: &Matrix<T>,
    factor: &Matrix<T>,
    s_w_reg: &Matrix<T>,
    r: usize,
) -> Result<(Vec<T>, Matrix<T>)> {
    let d = s_b.rows();
    if d > FULL_EIGEN_MAX_DIM {
        if let Some(found) = low_rank_generalized_eig(factor, s_w_reg, r)? {
            return Ok(clamp_nonnegative(found));
        }
    }
    let eig = whitened_generalized_eig(s_b, s_w_reg)?;
    let cols: Vec<usize> = (0..r).collect();
    Ok(clamp_nonnegative((eig.values[..r].to_vec(), eig.vectors.select_columns(&cols))))
}

fn clamp_nonnegative<T: Scalar>((values, vectors): (Vec<T>, Matrix<T>)) -> (Vec<T>, Matrix<T>) {
    (values.into_iter().map(|v| v.max(T::zero())).collect(), vectors)
}

/// Fits LDA on a labelled dataset.
pub fn fit_lda<T: Scalar>(ds: &SpectralDataset<T>, config: &LdaConfig<T>) -> Result<LdaModel<T>> {
    let c = ds.n_classes();
    let n = ds.n_samples();
    let d = ds.n_features();
    if c < 2 {
        return Err(Error::invalid("LDA needs at least two classes"));
    }
    if n < c + 1 {
        return Err(Error::invalid(format!(
            "LDA needs at least c + 1 = {} samples (got {n})",
            c + 1
        )));
    }
    let r = config.components.unwrap_or((c - 1).min(d));
    if r == 0 || r > c - 1 || r > d {
        return Err(Error::invalid(format!(
            "LDA components must be in 1..={} (got {r})",
            (c - 1).min(d)
        )));
    }
    let stats = class_statistics(ds)?;
    let scatter = scatter_matrices(ds, &stats)?;
    let factor = stats.between_factor();

    let (eigenvalues, projection) = match config.variant {
        LdaVariant::ClassIndependent => {
            let s_w_reg = ridge_regularize(&scatter.s_w, config.ridge_eps_rel)?;
            discriminants(&scatter.s_b, &factor, &s_w_reg, r)?
        }
        LdaVariant::ClassDependent => {
            let mut values = Vec::with_capacity(c * r);
            let mut blocks = Vec::with_capacity(c);
            for cls in 0..c {
                let s_wj = class_scatter(ds, &stats, cls);
                let s_wj_reg = ridge_regularize(&s_wj, config.ridge_eps_rel)?;
                let (v, t) = discriminants(&scatter.s_b, &factor, &s_wj_reg, r)?;
                values.extend(v);
                blocks.push(t);
            }
            (values, Matrix::hstack(&blocks)?)
        }
    };

    Ok(LdaModel {
        stats,
        projection,
        eigenvalues,
        components: r,
        variant: config.variant,
        ridge_eps_rel: config.ridge_eps_rel,
    })
}

/// `(1/n_j)·Σ_{x∈ω_j}(x − μ_j)(x − μ_j)ᵀ`.
fn class_scatter<T: Scalar>(ds: &SpectralDataset<T>, stats: &ClassStatistics<T>, cls: usize) -> Matrix<T> {
    let d = ds.n_features();
    let w = (T::one() / T::of_usize(stats.class_counts[cls])).sqrt();
    let mut s = Matrix::zeros(d, d);
    let mut z = vec![T::zero(); d];
    for (row, _) in ds.x().row_iter().zip(ds.y()).filter(|(_, &y)| y == cls) {
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = w * (row[k] - stats.class_means[(cls, k)]);
        }
        add_outer(&mut s, T::one(), &z, &z);
    }
    s
}

/// `Y = X·T`.
pub fn transform_lda<T: Scalar>(model: &LdaModel<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    if x.cols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: x.cols(),
        });
    }
    x.matmul(&model.projection)
}
