//! Significance testing and wrapper feature selection.

pub mod selection;
pub mod special;
pub mod ttest;

pub use selection::{
    backward_eliminate, candidate_windows, window_grid, window_search, BfeConfig, Selection, SelectionAction,
    SelectionStep, SelectionTrace, WindowConfig,
};
pub use special::{ln_gamma, reg_inc_beta, student_t_cdf, student_t_sf};
pub use ttest::{mean_spectrum_paired_t, paired_t_test, per_band_paired_t, TTestResult, SIGNIFICANCE_LEVEL};
