//! Supervised (LDA) and unsupervised (PCA) feature extraction.

pub mod lda;
pub mod pca;

pub use lda::{
    class_statistics, fit_lda, low_rank_generalized_eig, scatter_matrices, transform_lda, whitened_generalized_eig,
    ClassStatistics, LdaConfig, LdaModel, LdaVariant, ScatterPair, DEFAULT_RIDGE_EPS_REL,
};
pub use pca::{fit_pca, transform_pca, PcaModel};
