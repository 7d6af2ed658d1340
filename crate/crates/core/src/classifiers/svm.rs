//! Support vector machines trained by sequential minimal optimization.
//!
//! The dual `max Σα − ½ΣΣ αᵢαⱼyᵢyⱼK(xᵢ,xⱼ)` subject to `0 ≤ α ≤ C`,
//! `Σ yα = 0` is solved two multipliers at a time. Each step takes the pair
//! with the largest error gap `|Eᵢ − Eⱼ|` among pairs that violate the KKT
//! conditions, which is the maximal violating pair. The loop stops once that
//! gap is at most `tol`; the bias is then the midpoint of the gap, which puts
//! every training point within `tol/2` of its KKT condition.

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 200;

/// Multipliers at or below this fraction of the largest one are not kept as
/// support vectors.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel<T> {
    Linear,
    /// `exp(−γ‖x − z‖²)`
    Rbf { gamma: T },
}

impl<T: Scalar> Kernel<T> {
    #[inline]
    pub fn eval(&self, a: &[T], b: &[T]) -> T {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d2 = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>();
                (-gamma * d2).exp()
            }
        }
    }

    pub fn gram(&self, x: &Matrix<T>) -> Matrix<T> {
        let n = x.rows();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.eval(x.row(i), x.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

/// `1 / Σ_j var_j`, i.e. `1/(r · mean per-feature variance)`; 1 for constant data.
pub fn default_gamma<T: Scalar>(x: &Matrix<T>) -> T {
    if x.rows() == 0 || x.cols() == 0 {
        return T::one();
    }
    let mean = x.column_means();
    let n = T::of_usize(x.rows());
    let total: T = (0..x.cols())
        .map(|j| {
            x.row_iter()
                .map(|r| (r[j] - mean[j]) * (r[j] - mean[j]))
                .sum::<T>()
                / n
        })
        .sum();
    if total > T::zero() {
        T::one() / total
    } else {
        T::one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoParams<T> {
    pub c: T,
    pub tol: T,
    /// Iteration budget in units of n pair updates.
    pub max_passes: usize,
}

impl<T: Scalar> Default for SmoParams<T> {
    fn default() -> Self {
        Self {
            c: T::of(DEFAULT_C),
            tol: T::of(DEFAULT_TOL),
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

/// Raw dual solution over all training points.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution<T> {
    pub alphas: Vec<T>,
    pub bias: T,
    pub converged: bool,
    pub iterations: usize,
    /// Final maximal KKT gap `m(α) − M(α)`.
    pub gap: T,
}

/// Dual objective `Σα − ½ΣΣ αᵢαⱼyᵢyⱼKᵢⱼ`.
pub fn dual_objective<T: Scalar>(alphas: &[T], y: &[T], k: &Matrix<T>) -> T {
    let n = alphas.len();
    let mut quad = T::zero();
    for i in 0..n {
        for j in 0..n {
            quad = quad + alphas[i] * alphas[j] * y[i] * y[j] * k[(i, j)];
        }
    }
    alphas.iter().copied().sum::<T>() - T::of(0.5) * quad
}

fn check_binary_labels<T: Scalar>(y: &[T]) -> Result<()> {
    if y.iter().any(|&v| v != T::one() && v != -T::one()) {
        return Err(Error::invalid("binary SVM labels must be +1 or -1"));
    }
    if !y.iter().any(|&v| v > T::zero()) || !y.iter().any(|&v| v < T::zero()) {
        return Err(Error::invalid("binary SVM needs both labels present"));
    }
    Ok(())
}

/// Solves the dual for labels `y ∈ {−1, +1}` given the kernel Gram matrix.
pub fn smo_solve<T: Scalar>(k: &Matrix<T>, y: &[T], params: &SmoParams<T>) -> Result<SmoSolution<T>> {
    let n = y.len();
    if k.rows() != n || k.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.rows(),
        });
    }
    check_binary_labels(y)?;
    if !(params.c > T::zero()) || !params.c.is_finite() {
        return Err(Error::invalid("SVM box constraint C must be positive"));
    }
    if !(params.tol > T::zero()) {
        return Err(Error::invalid("SVM tolerance must be positive"));
    }
    let c = params.c;
    let tau = T::of(1e-12);
    let mut alpha = vec![T::zero(); n];
    // gradient of ½αᵀQα − eᵀα with Qᵢⱼ = yᵢyⱼKᵢⱼ
    let mut grad = vec![-T::one(); n];
    let max_iter = params.max_passes.saturating_mul(n.max(1));

    let in_up = |a: T, yi: T| (yi > T::zero() && a < c) || (yi < T::zero() && a > T::zero());
    let in_low = |a: T, yi: T| (yi > T::zero() && a > T::zero()) || (yi < T::zero() && a < c);

    let mut iterations = 0;
    let (converged, m_up, m_low) = loop {
        // i maximizes −yG over I_up, j minimizes it over I_low; first index wins ties
        let mut i = None;
        let mut j = None;
        let mut m_up = T::neg_infinity();
        let mut m_low = T::infinity();
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > m_up {
                m_up = v;
                i = Some(t);
            }
            if in_low(alpha[t], y[t]) && v < m_low {
                m_low = v;
                j = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i, j) else {
            break (true, m_up, m_low);
        };
        if m_up - m_low <= params.tol {
            break (true, m_up, m_low);
        }
        if iterations >= max_iter {
            break (false, m_up, m_low);
        }
        iterations += 1;

        // move α_i by y_i·t and α_j by −y_j·t, t > 0
        let mut eta = k[(i, i)] + k[(j, j)] - T::of(2.0) * k[(i, j)];
        if eta <= T::zero() {
            eta = tau;
        }
        let mut step = (m_up - m_low) / eta;
        let room = |a: T, dir: T| if dir > T::zero() { c - a } else { a };
        let room_i = room(alpha[i], y[i]);
        let room_j = room(alpha[j], -y[j]);
        let mut clip_i = false;
        let mut clip_j = false;
        if step >= room_i {
            step = room_i;
            clip_i = true;
        }
        if step >= room_j {
            step = room_j;
            clip_j = true;
            clip_i = step >= room_i;
        }
        let new_i = if clip_i { bound(y[i], c) } else { alpha[i] + y[i] * step };
        let new_j = if clip_j { bound(-y[j], c) } else { alpha[j] - y[j] * step };
        let di = new_i - alpha[i];
        let dj = new_j - alpha[j];
        alpha[i] = new_i;
        alpha[j] = new_j;
        for t in 0..n {
            let qi = y[t] * y[i] * k[(t, i)];
            let qj = y[t] * y[j] * k[(t, j)];
            grad[t] = grad[t] + (qi * di + qj * dj);
        }
    };

    let gap = if m_up.is_finite() && m_low.is_finite() {
        m_up - m_low
    } else {
        T::zero()
    };
    let bias = if m_up.is_finite() && m_low.is_finite() {
        (m_up + m_low) * T::of(0.5)
    } else if m_up.is_finite() {
        m_up
    } else if m_low.is_finite() {
        m_low
    } else {
        T::zero()
    };
    Ok(SmoSolution {
        alphas: alpha,
        bias,
        converged,
        iterations,
        gap,
    })
}

/// Value a multiplier lands on when its move in direction `dir` is clipped.
#[inline]
fn bound<T: Scalar>(dir: T, c: T) -> T {
    if dir > T::zero() {
        c
    } else {
        T::zero()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvmBinaryModel<T> {
    pub support_vectors: Matrix<T>,
    /// `yᵢ·αᵢ` per support vector.
    pub alphas: Vec<T>,
    pub bias: T,
    pub kernel: Kernel<T>,
    pub c_param: T,
    pub converged: bool,
}

impl<T: Scalar> SvmBinaryModel<T> {
    pub fn from_solution(x: &Matrix<T>, y: &[T], sol: &SmoSolution<T>, kernel: Kernel<T>, c_param: T) -> Self {
        let largest = sol.alphas.iter().copied().fold(T::zero(), T::max);
        let cut = largest * T::of(SUPPORT_THRESHOLD);
        let keep: Vec<usize> = (0..sol.alphas.len())
            .filter(|&i| sol.alphas[i] > cut)
            .collect();
        Self {
            support_vectors: x.select_rows(&keep),
            alphas: keep.iter().map(|&i| y[i] * sol.alphas[i]).collect(),
            bias: sol.bias,
            kernel,
            c_param,
            converged: sol.converged,
        }
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.cols()
    }

    /// For the linear kernel, `w = Σ yᵢαᵢ·svᵢ`.
    pub fn linear_weights(&self) -> Option<Vec<T>> {
        match self.kernel {
            Kernel::Linear => {
                let mut w = vec![T::zero(); self.dim()];
                for (sv, &a) in self.support_vectors.row_iter().zip(&self.alphas) {
                    for (wk, &v) in w.iter_mut().zip(sv) {
                        *wk = *wk + a * v;
                    }
                }
                Some(w)
            }
            Kernel::Rbf { .. } => None,
        }
    }
}

/// Trains a binary machine on labels `y ∈ {−1, +1}`.
pub fn fit_svm_binary<T: Scalar>(
    x: &Matrix<T>,
    y: &[T],
    kernel: Kernel<T>,
    params: &SmoParams<T>,
) -> Result<SvmBinaryModel<T>> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    let k = kernel.gram(x);
    let sol = smo_solve(&k, y, params)?;
    Ok(SvmBinaryModel::from_solution(x, y, &sol, kernel, params.c))
}

/// `f(x) = Σ yᵢαᵢ·K(svᵢ, x) + b`.
pub fn predict_svm_binary<T: Scalar>(model: &SvmBinaryModel<T>, x0: &[T]) -> Result<T> {
    if x0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x0.len(),
        });
    }
    let s = model
        .support_vectors
        .row_iter()
        .zip(&model.alphas)
        .fold(T::zero(), |acc, (sv, &a)| acc + a * model.kernel.eval(sv, x0));
    Ok(s + model.bias)
}

/// Kernel choice before the RBF width is resolved against training data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec<T> {
    Linear,
    /// `None` resolves to [`default_gamma`] of the training features.
    Rbf { gamma: Option<T> },
}

impl<T: Scalar> KernelSpec<T> {
    pub fn resolve(&self, x: &Matrix<T>) -> Kernel<T> {
        match *self {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Rbf { gamma } => Kernel::Rbf {
                gamma: gamma.unwrap_or_else(|| default_gamma(x)),
            },
        }
    }
}

/// One-vs-one ensemble: one machine per unordered class pair `(a, b)`, `a < b`,
/// with class `a` as the positive side.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmMulticlassModel<T> {
    pub n_classes: usize,
    pub pairwise: Vec<(usize, usize, SvmBinaryModel<T>)>,
}

pub fn fit_svm_multiclass<T: Scalar>(
    x: &Matrix<T>,
    y: &[usize],
    n_classes: usize,
    kernel: KernelSpec<T>,
    params: &SmoParams<T>,
) -> Result<SvmMulticlassModel<T>> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    if n_classes < 2 {
        return Err(Error::invalid("SVM needs at least two classes"));
    }
    let mut members = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        if c >= n_classes {
            return Err(Error::invalid(format!("class id {c} out of range")));
        }
        members[c].push(i);
    }
    if let Some(absent) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(absent));
    }
    let kernel = kernel.resolve(x);
    let mut pairwise = Vec::with_capacity(n_classes * (n_classes - 1) / 2);
    for a in 0..n_classes {
        for b in (a + 1)..n_classes {
            let mut rows = members[a].clone();
            rows.extend(&members[b]);
            rows.sort_unstable();
            let sub = x.select_rows(&rows);
            let yy: Vec<T> = rows
                .iter()
                .map(|&r| if y[r] == a { T::one() } else { -T::one() })
                .collect();
            pairwise.push((a, b, fit_svm_binary(&sub, &yy, kernel, params)?));
        }
    }
    Ok(SvmMulticlassModel { n_classes, pairwise })
}

/// Class with most pairwise wins; ties go to the larger summed `|f|` over the
/// machines each tied class won, then to the lower class id. A machine with
/// `f ≥ 0` votes for its first class.
pub fn predict_svm_multiclass<T: Scalar>(model: &SvmMulticlassModel<T>, x0: &[T]) -> Result<usize> {
    let mut votes = vec![0usize; model.n_classes];
    let mut strength = vec![T::zero(); model.n_classes];
    for (a, b, m) in &model.pairwise {
        let f = predict_svm_binary(m, x0)?;
        let winner = if f >= T::zero() { *a } else { *b };
        votes[winner] += 1;
        strength[winner] = strength[winner] + f.abs();
    }
    let mut best = 0;
    for c in 1..model.n_classes {
        if votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]) {
            best = c;
        }
    }
    Ok(best)
}
