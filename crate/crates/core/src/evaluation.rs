//! Confusion matrices, balanced accuracy and stratified cross-validation.
//!
//! Headline metrics come from the pooled confusion matrix (the sum over
//! folds). Per-fold matrices and their balanced accuracies are kept as well.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::{stratified_folds, FoldAssignment, SpectralDataset};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pipeline::{ClassifierKind, FeatureKind, FittedPipeline, PipelineConfig};
use crate::scalar::Scalar;

/// Rows are true classes, columns predicted classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn from_counts<R: AsRef<[usize]>>(rows: &[R]) -> Result<Self> {
        let c = rows.len();
        let mut m = Self::new(c);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: r.len(),
                });
            }
            m.counts[i * c..(i + 1) * c].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> usize {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.n_classes + predicted] += 1;
    }

    pub fn row(&self, truth: usize) -> &[usize] {
        &self.counts[truth * self.n_classes..(truth + 1) * self.n_classes]
    }

    pub fn row_sum(&self, truth: usize) -> usize {
        self.row(truth).iter().sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.n_classes).map(|i| self.get(i, i)).sum()
    }

    pub fn accuracy(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.correct() as f64 / n as f64)
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.n_classes != self.n_classes {
            return Err(Error::DimensionMismatch {
                expected: self.n_classes,
                found: other.n_classes,
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Views for class `i` against the rest: (TP, FN, FP, TN).
    pub fn one_vs_rest(&self, i: usize) -> (usize, usize, usize, usize) {
        let tp = self.get(i, i);
        let fn_ = self.row_sum(i) - tp;
        let fp = (0..self.n_classes).map(|t| self.get(t, i)).sum::<usize>() - tp;
        (tp, fn_, fp, self.total() - tp - fn_ - fp)
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::new(n_classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::invalid(format!(
                "class id {} out of range for {n_classes} classes",
                t.max(p)
            )));
        }
        cm.record(t, p);
    }
    Ok(cm)
}

/// `counts[i][i] / row_sum_i` for every class.
pub fn per_class_recall(cm: &ConfusionMatrix) -> Result<Vec<f64>> {
    (0..cm.n_classes())
        .map(|i| match cm.row_sum(i) {
            0 => Err(Error::EmptyClass(i)),
            n => Ok(cm.get(i, i) as f64 / n as f64),
        })
        .collect()
}

/// Mean per-class recall.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.n_classes() == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let r = per_class_recall(cm)?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    /// `None` when some class is missing from the held-out fold.
    pub balanced_accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub per_fold: Vec<FoldResult>,
    pub pooled: ConfusionMatrix,
    pub balanced_accuracy: f64,
    pub per_class_recall: Vec<f64>,
    /// Mean of the defined per-fold balanced accuracies.
    pub mean_fold_balanced_accuracy: Option<f64>,
    /// Out-of-fold prediction for every sample.
    pub predictions: Vec<usize>,
    pub class_names: Vec<String>,
    pub config_echo: String,
}

impl CvReport {
    /// One row per fold plus a `pooled` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("fold,n,accuracy,balanced_accuracy");
        for name in &self.class_names {
            let _ = write!(s, ",recall_{name}");
        }
        s.push('\n');
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for f in &self.per_fold {
            let _ = write!(
                s,
                "{},{},{},{}",
                f.fold,
                f.confusion.total(),
                opt(f.confusion.accuracy()),
                opt(f.balanced_accuracy)
            );
            for i in 0..f.confusion.n_classes() {
                let n = f.confusion.row_sum(i);
                let r = (n > 0).then(|| f.confusion.get(i, i) as f64 / n as f64);
                let _ = write!(s, ",{}", opt(r));
            }
            s.push('\n');
        }
        let _ = write!(
            s,
            "pooled,{},{},{:.6}",
            self.pooled.total(),
            opt(self.pooled.accuracy()),
            self.balanced_accuracy
        );
        for r in &self.per_class_recall {
            let _ = write!(s, ",{r:.6}");
        }
        s.push('\n');
        s
    }

    /// Human-readable summary: configuration, pooled confusion matrix and
    /// per-class recall.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Configuration");
        for line in self.config_echo.lines() {
            let _ = writeln!(s, "  {line}");
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "Balanced accuracy (pooled): {}", percent(self.balanced_accuracy));
        if let Some(m) = self.mean_fold_balanced_accuracy {
            let _ = writeln!(s, "Balanced accuracy (fold mean): {}", percent(m));
        }
        let _ = writeln!(s);
        let width = self.class_names.iter().map(String::len).max().unwrap_or(0).max(10);
        let _ = writeln!(s, "{:<width$}  {:>8}", "class", "recall");
        for (name, r) in self.class_names.iter().zip(&self.per_class_recall) {
            let _ = writeln!(s, "{name:<width$}  {:>8}", percent(*r));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "Pooled confusion matrix (rows true, columns predicted)");
        let _ = write!(s, "{:<width$}", "");
        for i in 0..self.pooled.n_classes() {
            let _ = write!(s, "  {i:>5}");
        }
        s.push('\n');
        for (i, name) in self.class_names.iter().enumerate() {
            let _ = write!(s, "{name:<width$}");
            for &v in self.pooled.row(i) {
                let _ = write!(s, "  {v:>5}");
            }
            s.push('\n');
        }
        s
    }
}

fn percent(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

/// Cross-validates a pipeline with stratified folds drawn from its own
/// `folds` and `seed`.
pub fn cross_validate<T: Scalar>(ds: &SpectralDataset<T>, config: &PipelineConfig<T>) -> Result<CvReport> {
    let folds = stratified_folds(ds, config.folds, config.seed)?;
    cross_validate_with_folds(ds, config, &folds)
}

pub fn cross_validate_with_folds<T: Scalar>(
    ds: &SpectralDataset<T>,
    config: &PipelineConfig<T>,
    folds: &FoldAssignment,
) -> Result<CvReport> {
    cross_validate_with(ds, folds, config.to_text(), |train, test| {
        FittedPipeline::fit(train, config)?.predict(test)
    })
}

/// Cross-validation with an arbitrary fit-and-predict closure.
///
/// `fit_predict` receives the training partition and the held-out feature
/// rows and returns one class id per held-out row. Folds run in parallel;
/// errors carry the index of the first failing fold.
pub fn cross_validate_with<T, F>(
    ds: &SpectralDataset<T>,
    folds: &FoldAssignment,
    config_echo: String,
    fit_predict: F,
) -> Result<CvReport>
where
    T: Scalar,
    F: Fn(&SpectralDataset<T>, &Matrix<T>) -> Result<Vec<usize>> + Sync,
{
    if folds.fold_of.len() != ds.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_samples(),
            found: folds.fold_of.len(),
        });
    }
    let c = ds.n_classes();
    let outcomes: Vec<Result<(Vec<usize>, Vec<usize>)>> = (0..folds.k)
        .into_par_iter()
        .map(|f| {
            let test = folds.test_indices(f);
            let train = folds.train_indices(f);
            let with_fold = |e: Error| match e {
                Error::Stage { stage, source, .. } => Error::Stage {
                    fold: Some(f),
                    stage,
                    source,
                },
                other => Error::Stage {
                    fold: Some(f),
                    stage: "fit-predict",
                    source: Box::new(other),
                },
            };
            let pred = fit_predict(&ds.subset_rows(&train), &ds.x().select_rows(&test)).map_err(with_fold)?;
            if pred.len() != test.len() {
                return Err(with_fold(Error::DimensionMismatch {
                    expected: test.len(),
                    found: pred.len(),
                }));
            }
            Ok((test, pred))
        })
        .collect();

    let mut predictions = vec![usize::MAX; ds.n_samples()];
    let mut pooled = ConfusionMatrix::new(c);
    let mut per_fold = Vec::with_capacity(folds.k);
    for (f, outcome) in outcomes.into_iter().enumerate() {
        let (test, pred) = outcome?;
        let truth: Vec<usize> = test.iter().map(|&i| ds.y()[i]).collect();
        let cm = confusion_matrix(&truth, &pred, c).map_err(|e| Error::Stage {
            fold: Some(f),
            stage: "predict",
            source: Box::new(e),
        })?;
        pooled.merge(&cm)?;
        for (&i, &p) in test.iter().zip(&pred) {
            predictions[i] = p;
        }
        per_fold.push(FoldResult {
            fold: f,
            balanced_accuracy: balanced_accuracy(&cm).ok(),
            confusion: cm,
        });
    }
    let defined: Vec<f64> = per_fold.iter().filter_map(|f| f.balanced_accuracy).collect();
    Ok(CvReport {
        balanced_accuracy: balanced_accuracy(&pooled)?,
        per_class_recall: per_class_recall(&pooled)?,
        mean_fold_balanced_accuracy: (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64),
        per_fold,
        pooled,
        predictions,
        class_names: ds.labels().iter().map(|l| l.name.clone()).collect(),
        config_echo,
    })
}

/// Feature methods × classifiers evaluated on shared folds.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig<T> {
    /// Window, hyperparameters, fold count and seed shared by every cell.
    pub base: PipelineConfig<T>,
    pub features: Vec<FeatureKind>,
    pub classifiers: Vec<ClassifierKind>,
}

impl<T: Scalar> GridConfig<T> {
    /// The full 3×3 grid.
    pub fn full(base: PipelineConfig<T>) -> Self {
        Self {
            base,
            features: FeatureKind::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub features: FeatureKind,
    pub classifier: ClassifierKind,
    /// Error text for a failed cell.
    pub outcome: std::result::Result<CvReport, String>,
}

impl GridCell {
    pub fn balanced_accuracy(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.balanced_accuracy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    /// Classifier-major order: for each classifier, every feature method.
    pub cells: Vec<GridCell>,
    pub features: Vec<FeatureKind>,
    pub classifiers: Vec<ClassifierKind>,
    pub config_echo: String,
}

impl GridReport {
    pub fn cell(&self, features: FeatureKind, classifier: ClassifierKind) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.features == features && c.classifier == classifier)
    }

    /// `classifier,features,balanced_accuracy,recall_*` rows; failed cells
    /// leave the metrics empty and put the error in a final column.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let mut s = String::from("classifier,features,balanced_accuracy");
        for name in class_names {
            let _ = write!(s, ",recall_{name}");
        }
        s.push_str(",error\n");
        for cell in &self.cells {
            let _ = write!(s, "{},{}", cell.classifier.name(), cell.features.name());
            match &cell.outcome {
                Ok(r) => {
                    let _ = write!(s, ",{:.6}", r.balanced_accuracy);
                    for v in &r.per_class_recall {
                        let _ = write!(s, ",{v:.6}");
                    }
                    s.push_str(",\n");
                }
                Err(e) => {
                    s.push(',');
                    for _ in class_names {
                        s.push(',');
                    }
                    let _ = writeln!(s, ",\"{}\"", e.replace('"', "'"));
                }
            }
        }
        s
    }

    /// Balanced-accuracy table with classifiers as rows and feature methods
    /// as columns, followed by the shared configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::from("Balanced accuracy (pooled over folds)\n\n");
        let _ = write!(s, "{:<12}", "classifier");
        for f in &self.features {
            let _ = write!(s, "  {:>10}", f.name());
        }
        s.push('\n');
        for c in &self.classifiers {
            let _ = write!(s, "{:<12}", c.name());
            for f in &self.features {
                let v = self
                    .cell(*f, *c)
                    .and_then(GridCell::balanced_accuracy)
                    .map_or_else(|| "failed".to_string(), percent);
                let _ = write!(s, "  {v:>10}");
            }
            s.push('\n');
        }
        let failures: Vec<&GridCell> = self.cells.iter().filter(|c| c.outcome.is_err()).collect();
        if !failures.is_empty() {
            s.push_str("\nFailed cells\n");
            for c in failures {
                if let Err(e) = &c.outcome {
                    let _ = writeln!(s, "  {}+{}: {e}", c.features.name(), c.classifier.name());
                }
            }
        }
        s.push_str("\nShared configuration\n");
        for line in self.config_echo.lines() {
            let _ = writeln!(s, "  {line}");
        }
        s
    }
}

/// Cross-validates every grid cell on one shared fold assignment. A failing
/// cell is recorded and the remaining cells still run.
pub fn grid_evaluate<T: Scalar>(ds: &SpectralDataset<T>, grid: &GridConfig<T>) -> Result<GridReport> {
    let folds = stratified_folds(ds, grid.base.folds, grid.base.seed)?;
    let pairs: Vec<(FeatureKind, ClassifierKind)> = grid
        .classifiers
        .iter()
        .flat_map(|&c| grid.features.iter().map(move |&f| (f, c)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(features, classifier)| {
            let config = PipelineConfig {
                features,
                classifier,
                ..grid.base
            };
            GridCell {
                features,
                classifier,
                outcome: cross_validate_with_folds(ds, &config, &folds).map_err(|e| e.to_string()),
            }
        })
        .collect();
    let mut echo = grid.base.to_text();
    echo = echo
        .lines()
        .filter(|l| !l.starts_with("features =") && !l.starts_with("classifier ="))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        });
    Ok(GridReport {
        cells,
        features: grid.features.clone(),
        classifiers: grid.classifiers.clone(),
        config_echo: echo,
    })
}

/// Pooled balanced accuracy of the pipeline for each KNN neighbour count,
/// all on the same folds.
pub fn sweep_k<T: Scalar>(
    ds: &SpectralDataset<T>,
    config: &PipelineConfig<T>,
    k_values: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if config.classifier != ClassifierKind::Knn {
        return Err(Error::invalid("k sweep needs the knn classifier"));
    }
    if k_values.is_empty() {
        return Err(Error::Empty("k values"));
    }
    let folds = stratified_folds(ds, config.folds, config.seed)?;
    let smallest_train = (0..folds.k)
        .map(|f| ds.n_samples() - folds.test_indices(f).len())
        .min()
        .unwrap_or(0);
    if let Some(&bad) = k_values.iter().find(|&&k| k == 0 || k > smallest_train) {
        return Err(Error::invalid(format!(
            "k = {bad} outside 1..={smallest_train} (smallest training partition)"
        )));
    }
    k_values
        .par_iter()
        .map(|&k| {
            let mut c = *config;
            c.hyper.knn_k = k;
            cross_validate_with_folds(ds, &c, &folds).map(|r| (k, r.balanced_accuracy))
        })
        .collect()
}

pub fn sweep_csv(rows: &[(usize, f64)]) -> String {
    let mut s = String::from("k,balanced_accuracy\n");
    for (k, a) in rows {
        let _ = writeln!(s, "{k},{a:.6}");
    }
    s
}
