//! KNN and SVM classifiers.

pub mod knn;
pub mod svm;

pub use knn::{fit_knn, predict_knn, predict_knn_batch, KnnModel, Metric, DEFAULT_K};
pub use svm::{
    default_gamma, dual_objective, fit_svm_binary, fit_svm_multiclass, predict_svm_binary, predict_svm_multiclass,
    smo_solve, Kernel, KernelSpec, SmoParams, SmoSolution, SvmBinaryModel, SvmMulticlassModel, DEFAULT_C,
    DEFAULT_MAX_PASSES, DEFAULT_TOL, SUPPORT_THRESHOLD,
};
