//! Wrapper feature selection: greedy backward elimination and contiguous
//! window search.
//!
//! Both take an evaluator that scores a dataset (typically a cross-validated
//! balanced accuracy). Candidate scores are computed in parallel and reduced
//! in candidate order, so results do not depend on scheduling.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::SpectralDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// What one selection step did.
#[derive(Clone, Debug, PartialEq)]
pub enum SelectionAction<T> {
    /// A column of the input dataset was dropped.
    Removed { feature: usize, wavelength: T },
    /// A contiguous column range `[lo, hi]` was scored.
    Window { lo: usize, hi: usize, lo_nm: T, hi_nm: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionStep<T> {
    pub action: SelectionAction<T>,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Selection<T> {
    /// Retained column indices, ascending.
    Features(Vec<usize>),
    Window { lo: usize, hi: usize, lo_nm: T, hi_nm: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionTrace<T> {
    /// Score of the full dataset before any removal (elimination only).
    pub baseline: Option<f64>,
    pub steps: Vec<SelectionStep<T>>,
    pub selected: Selection<T>,
    /// Score of `selected`.
    pub score: f64,
}

impl<T: Scalar> SelectionTrace<T> {
    /// `step,removed_or_window,score` rows, steps numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,removed_or_window,score\n");
        for (i, s) in self.steps.iter().enumerate() {
            let what = match &s.action {
                SelectionAction::Removed { feature, .. } => feature.to_string(),
                SelectionAction::Window { lo_nm, hi_nm, .. } => format!("{lo_nm}:{hi_nm}"),
            };
            let _ = writeln!(out, "{},{},{}", i + 1, what, s.score);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfeConfig {
    /// Largest score drop a removal may cause and still be accepted.
    pub tolerance: f64,
    /// Elimination stops once this many features remain.
    pub min_features: usize,
}

impl Default for BfeConfig {
    fn default() -> Self {
        Self {
            tolerance: 0.0,
            min_features: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowConfig {
    /// Spacing, in columns, of candidate window boundaries.
    pub grid_step: usize,
    /// Narrowest window considered, in columns.
    pub min_width: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            grid_step: 1,
            min_width: 1,
        }
    }
}

fn checked_score(score: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::invalid(format!("evaluator returned score {score} outside [0, 1]")));
    }
    Ok(score)
}

/// Greedy backward feature elimination.
///
/// Each round scores the dataset with every remaining feature left out in
/// turn and permanently drops the one whose removal scores highest (ties go
/// to the lower column index). Stops when that best score falls more than
/// `tolerance` below the current score or `min_features` remain.
pub fn backward_eliminate<T, F>(ds: &SpectralDataset<T>, evaluator: F, config: &BfeConfig) -> Result<SelectionTrace<T>>
where
    T: Scalar,
    F: Fn(&SpectralDataset<T>) -> Result<f64> + Sync,
{
    let d = ds.n_features();
    if d < 2 {
        return Err(Error::invalid("backward elimination needs at least 2 features"));
    }
    if config.min_features == 0 {
        return Err(Error::invalid("min_features must be at least 1"));
    }
    if config.tolerance.is_nan() {
        return Err(Error::invalid("tolerance must not be NaN"));
    }

    let mut remaining: Vec<usize> = (0..d).collect();
    let baseline = evaluator(ds)
        .and_then(checked_score)
        .map_err(|e| Error::Evaluator {
            feature: None,
            source: Box::new(e),
        })?;
    let mut current = baseline;
    let mut steps = Vec::new();

    while remaining.len() > config.min_features {
        let scores: Vec<Result<f64>> = remaining
            .par_iter()
            .map(|&f| {
                let cols: Vec<usize> = remaining.iter().copied().filter(|&c| c != f).collect();
                ds.subset_columns(&cols)
                    .and_then(|sub| evaluator(&sub))
                    .and_then(checked_score)
                    .map_err(|e| Error::Evaluator {
                        feature: Some(f),
                        source: Box::new(e),
                    })
            })
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for (pos, s) in scores.into_iter().enumerate() {
            let s = s?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((pos, s));
            }
        }
        let (pos, score) = best.expect("at least one candidate");
        if score < current - config.tolerance {
            break;
        }
        let feature = remaining.remove(pos);
        current = score;
        steps.push(SelectionStep {
            action: SelectionAction::Removed {
                feature,
                wavelength: ds.axis().values()[feature],
            },
            score,
        });
    }

    Ok(SelectionTrace {
        baseline: Some(baseline),
        steps,
        selected: Selection::Features(remaining),
        score: current,
    })
}

/// Candidate boundary columns: every `grid_step`-th column plus the last one.
pub fn window_grid(d: usize, grid_step: usize) -> Vec<usize> {
    let mut cands: Vec<usize> = (0..d).step_by(grid_step.max(1)).collect();
    if d > 0 && cands.last() != Some(&(d - 1)) {
        cands.push(d - 1);
    }
    cands
}

/// All `[lo, hi]` pairs on the boundary grid at least `min_width` columns wide,
/// ordered by `lo` then `hi`.
pub fn candidate_windows(d: usize, config: &WindowConfig) -> Vec<(usize, usize)> {
    let grid = window_grid(d, config.grid_step);
    let mut out = Vec::new();
    for (i, &lo) in grid.iter().enumerate() {
        for &hi in &grid[i..] {
            if hi - lo + 1 >= config.min_width {
                out.push((lo, hi));
            }
        }
    }
    out
}

/// Exhaustive search for the best contiguous band window on a boundary grid.
///
/// Ties go to the narrower window, then to the smaller lower bound.
pub fn window_search<T, F>(ds: &SpectralDataset<T>, evaluator: F, config: &WindowConfig) -> Result<SelectionTrace<T>>
where
    T: Scalar,
    F: Fn(&SpectralDataset<T>) -> Result<f64> + Sync,
{
    if config.grid_step == 0 {
        return Err(Error::invalid("grid_step must be at least 1"));
    }
    let windows = candidate_windows(ds.n_features(), config);
    if windows.is_empty() {
        return Err(Error::invalid(format!(
            "no window of at least {} columns fits {} features",
            config.min_width,
            ds.n_features()
        )));
    }
    let scores: Vec<Result<f64>> = windows
        .par_iter()
        .map(|&(lo, hi)| {
            let cols: Vec<usize> = (lo..=hi).collect();
            ds.subset_columns(&cols)
                .and_then(|sub| evaluator(&sub))
                .and_then(checked_score)
                .map_err(|e| Error::Evaluator {
                    feature: Some(lo),
                    source: Box::new(e),
                })
        })
        .collect();

    let axis = ds.axis().values();
    let mut steps = Vec::with_capacity(windows.len());
    let mut best: Option<(usize, usize, f64)> = None;
    for (&(lo, hi), s) in windows.iter().zip(scores) {
        let s = s?;
        steps.push(SelectionStep {
            action: SelectionAction::Window {
                lo,
                hi,
                lo_nm: axis[lo],
                hi_nm: axis[hi],
            },
            score: s,
        });
        let better = match best {
            None => true,
            Some((blo, bhi, bs)) => {
                s > bs || (s == bs && ((hi - lo) < (bhi - blo) || ((hi - lo) == (bhi - blo) && lo < blo)))
            }
        };
        if better {
            best = Some((lo, hi, s));
        }
    }
    let (lo, hi, score) = best.expect("non-empty grid");
    Ok(SelectionTrace {
        baseline: None,
        steps,
        selected: Selection::Window {
            lo,
            hi,
            lo_nm: axis[lo],
            hi_nm: axis[hi],
        },
        score,
    })
}
