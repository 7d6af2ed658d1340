//! Window → feature extraction → classifier pipelines and their configuration.
//!
//! Configuration text is flat `key = value` lines grouped under optional
//! `[section]` headers. A key `k` under `[s]` is the same as `s.k` at top
//! level; `[pipeline]` is an alias for the top level. `#` starts a comment.

use std::fmt::Write as _;

use crate::classifiers::{
    fit_knn, fit_svm_multiclass, predict_knn_batch, predict_svm_multiclass, KernelSpec, KnnModel, Metric, SmoParams,
    SvmMulticlassModel, DEFAULT_K,
};
use crate::data::{ClassLabel, SpectralDataset, WavelengthAxis, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::features::{fit_lda, fit_pca, transform_lda, transform_pca, LdaConfig, LdaModel, LdaVariant, PcaModel};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_PCA_COMPONENTS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Original,
    Pca,
    Lda,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [FeatureKind::Original, FeatureKind::Pca, FeatureKind::Lda];

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Original => "original",
            FeatureKind::Pca => "pca",
            FeatureKind::Lda => "lda",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Knn,
    LinearSvm,
    RbfSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Knn, ClassifierKind::LinearSvm, ClassifierKind::RbfSvm];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::LinearSvm => "linear_svm",
            ClassifierKind::RbfSvm => "rbf_svm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Every tunable of every stage; only the ones used by the chosen kinds matter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparameters<T> {
    pub pca_components: usize,
    pub lda: LdaConfig<T>,
    pub knn_k: usize,
    pub knn_metric: Metric,
    pub svm: SmoParams<T>,
    /// RBF width; `None` derives it from the training features.
    pub svm_gamma: Option<T>,
}

impl<T: Scalar> Default for Hyperparameters<T> {
    fn default() -> Self {
        Self {
            pca_components: DEFAULT_PCA_COMPONENTS,
            lda: LdaConfig::default(),
            knn_k: DEFAULT_K,
            knn_metric: Metric::Euclidean,
            svm: SmoParams::default(),
            svm_gamma: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig<T> {
    /// Inclusive wavelength range kept before feature extraction.
    pub window: Option<(T, T)>,
    pub features: FeatureKind,
    pub classifier: ClassifierKind,
    pub hyper: Hyperparameters<T>,
    pub folds: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            window: None,
            features: FeatureKind::Lda,
            classifier: ClassifierKind::Knn,
            hyper: Hyperparameters::default(),
            folds: DEFAULT_FOLDS,
            seed: DEFAULT_SEED,
        }
    }
}

/// One `key = value` line of configuration text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    /// Section-qualified key, e.g. `knn.k`.
    pub key: String,
    pub value: String,
}

pub fn parse_config_entries(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                line,
                message: format!("unterminated section header `{s}`"),
            })?;
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::Config {
                    line,
                    message: format!("bad section name `{name}`"),
                });
            }
            section = if name == "pipeline" { String::new() } else { name.to_string() };
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, found `{s}`"),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config {
                line,
                message: "missing key".into(),
            });
        }
        let key = if section.is_empty() {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        out.push(ConfigEntry {
            line,
            key,
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

fn parse_num<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_auto<V: std::str::FromStr>(key: &str, value: &str) -> Result<Option<V>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

/// `LO:HI` in nanometres.
pub fn parse_window<T: Scalar>(value: &str) -> Result<(T, T)> {
    let (lo, hi) = value
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("window must be LO:HI (got `{value}`)")))?;
    let lo: T = parse_num("window", lo.trim())?;
    let hi: T = parse_num("window", hi.trim())?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("window must satisfy LO < HI (got `{value}`)")));
    }
    Ok((lo, hi))
}

impl<T: Scalar> PipelineConfig<T> {
    /// Applies one section-qualified setting. Unknown keys and values are
    /// errors that name the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let h = &mut self.hyper;
        match key {
            "window" => {
                self.window = if value == "none" { None } else { Some(parse_window(value)?) };
            }
            "pipeline" => self.set_pipeline(value)?,
            "features" => {
                self.features = FeatureKind::parse(value)
                    .ok_or_else(|| Error::invalid(format!("`features`: unknown method `{value}`")))?;
            }
            "classifier" => {
                self.classifier = ClassifierKind::parse(value)
                    .ok_or_else(|| Error::invalid(format!("`classifier`: unknown classifier `{value}`")))?;
            }
            "folds" => self.folds = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "pca.components" => h.pca_components = parse_num(key, value)?,
            "lda.components" => h.lda.components = parse_auto(key, value)?,
            "lda.ridge_eps_rel" => h.lda.ridge_eps_rel = parse_num(key, value)?,
            "lda.variant" => {
                h.lda.variant = LdaVariant::parse(value)
                    .ok_or_else(|| Error::invalid(format!("`{key}`: unknown variant `{value}`")))?;
            }
            "knn.k" => h.knn_k = parse_num(key, value)?,
            "knn.metric" => {
                h.knn_metric =
                    Metric::parse(value).ok_or_else(|| Error::invalid(format!("`{key}`: unknown metric `{value}`")))?;
            }
            "svm.c" => h.svm.c = parse_num(key, value)?,
            "svm.gamma" => h.svm_gamma = parse_auto(key, value)?,
            "svm.tol" => h.svm.tol = parse_num(key, value)?,
            "svm.max_passes" => h.svm.max_passes = parse_num(key, value)?,
            _ => return Err(Error::invalid(format!("unknown setting `{key}`"))),
        }
        Ok(())
    }

    /// `FEATURES+CLASSIFIER`, e.g. `lda+knn` or `pca+rbf_svm`.
    pub fn set_pipeline(&mut self, value: &str) -> Result<()> {
        let (f, c) = value
            .split_once('+')
            .ok_or_else(|| Error::invalid(format!("`pipeline` must be FEATURES+CLASSIFIER (got `{value}`)")))?;
        self.set("features", f.trim())?;
        self.set("classifier", c.trim())
    }

    /// Applies configuration text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for e in parse_config_entries(text)? {
            self.set(&e.key, &e.value).map_err(|err| Error::Config {
                line: e.line,
                message: match err {
                    Error::InvalidArgument(m) => m,
                    other => other.to_string(),
                },
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn name(&self) -> String {
        format!("{}+{}", self.features.name(), self.classifier.name())
    }

    /// Full effective configuration in the same text format [`apply_text`]
    /// reads; parsing it back reproduces `self`.
    ///
    /// [`apply_text`]: Self::apply_text
    pub fn to_text(&self) -> String {
        let h = &self.hyper;
        let auto = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        let mut s = String::new();
        let _ = writeln!(s, "[pipeline]");
        let _ = writeln!(
            s,
            "window = {}",
            self.window.map_or_else(|| "none".into(), |(lo, hi)| format!("{lo}:{hi}"))
        );
        let _ = writeln!(s, "features = {}", self.features.name());
        let _ = writeln!(s, "classifier = {}", self.classifier.name());
        let _ = writeln!(s, "folds = {}", self.folds);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "[pca]\ncomponents = {}", h.pca_components);
        let _ = writeln!(
            s,
            "[lda]\ncomponents = {}\nridge_eps_rel = {}\nvariant = {}",
            auto(h.lda.components.map(|c| c.to_string())),
            h.lda.ridge_eps_rel,
            h.lda.variant.name()
        );
        let _ = writeln!(s, "[knn]\nk = {}\nmetric = {}", h.knn_k, h.knn_metric.name());
        let _ = writeln!(
            s,
            "[svm]\nc = {}\ngamma = {}\ntol = {}\nmax_passes = {}",
            h.svm.c,
            auto(h.svm_gamma.map(|g| g.to_string())),
            h.svm.tol,
            h.svm.max_passes
        );
        s
    }

    fn kernel(&self) -> Option<KernelSpec<T>> {
        match self.classifier {
            ClassifierKind::Knn => None,
            ClassifierKind::LinearSvm => Some(KernelSpec::Linear),
            ClassifierKind::RbfSvm => Some(KernelSpec::Rbf {
                gamma: self.hyper.svm_gamma,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FittedFeature<T> {
    Original,
    Pca(PcaModel<T>),
    Lda(LdaModel<T>),
}

impl<T: Scalar> FittedFeature<T> {
    pub fn fit(ds: &SpectralDataset<T>, kind: FeatureKind, hyper: &Hyperparameters<T>) -> Result<Self> {
        Ok(match kind {
            FeatureKind::Original => FittedFeature::Original,
            FeatureKind::Pca => FittedFeature::Pca(fit_pca(ds.x(), hyper.pca_components)?),
            FeatureKind::Lda => FittedFeature::Lda(fit_lda(ds, &hyper.lda)?),
        })
    }

    pub fn transform(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        match self {
            FittedFeature::Original => Ok(x.clone()),
            FittedFeature::Pca(m) => transform_pca(m, x),
            FittedFeature::Lda(m) => transform_lda(m, x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FittedClassifier<T> {
    Knn(KnnModel<T>),
    Svm(SvmMulticlassModel<T>),
}

impl<T: Scalar> FittedClassifier<T> {
    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<usize>> {
        match self {
            FittedClassifier::Knn(m) => predict_knn_batch(m, x),
            FittedClassifier::Svm(m) => x.row_iter().map(|r| predict_svm_multiclass(m, r)).collect(),
        }
    }
}

/// A pipeline fitted on one training set.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedPipeline<T> {
    pub config: PipelineConfig<T>,
    /// Axis of the training data before windowing.
    pub axis: WavelengthAxis<T>,
    /// Training-axis columns kept by the window, ascending.
    pub window_columns: Vec<usize>,
    pub feature: FittedFeature<T>,
    pub classifier: FittedClassifier<T>,
    pub labels: Vec<ClassLabel>,
}

fn stage<V>(stage: &'static str, r: Result<V>) -> Result<V> {
    r.map_err(|e| Error::Stage {
        fold: None,
        stage,
        source: Box::new(e),
    })
}

impl<T: Scalar> FittedPipeline<T> {
    /// Fits every stage on `ds`. Failures are wrapped in [`Error::Stage`].
    pub fn fit(ds: &SpectralDataset<T>, config: &PipelineConfig<T>) -> Result<Self> {
        let window_columns = stage("window", window_columns(ds.axis(), config.window))?;
        let train = stage("window", ds.subset_columns(&window_columns))?;
        let feature = stage("features", FittedFeature::fit(&train, config.features, &config.hyper))?;
        let z = stage("features", feature.transform(train.x()))?;
        let h = &config.hyper;
        let classifier = stage(
            "classifier",
            match config.kernel() {
                None => fit_knn(&z, train.y(), h.knn_k, h.knn_metric).map(FittedClassifier::Knn),
                Some(kernel) => {
                    fit_svm_multiclass(&z, train.y(), train.n_classes(), kernel, &h.svm).map(FittedClassifier::Svm)
                }
            },
        )?;
        Ok(Self {
            config: *config,
            axis: ds.axis().clone(),
            window_columns,
            feature,
            classifier,
            labels: ds.labels().to_vec(),
        })
    }

    pub fn windowed_axis(&self) -> WavelengthAxis<T> {
        self.axis.select(&self.window_columns)
    }

    /// Predicts rows laid out on the training axis (before windowing).
    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<usize>> {
        if x.cols() != self.axis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.axis.len(),
                found: x.cols(),
            });
        }
        let xw = x.select_columns(&self.window_columns);
        let z = stage("features", self.feature.transform(&xw))?;
        stage("predict", self.classifier.predict(&z))
    }

    /// Predicts rows measured on `axis`, which must coincide with the training
    /// axis inside the window. Extra bands outside the window are ignored.
    pub fn predict_on_axis(&self, axis: &WavelengthAxis<T>, x: &Matrix<T>) -> Result<Vec<usize>> {
        if x.cols() != axis.len() {
            return Err(Error::DimensionMismatch {
                expected: axis.len(),
                found: x.cols(),
            });
        }
        let cols = match window_columns(axis, self.config.window) {
            Ok(c) => c,
            Err(Error::EmptyWindow { .. }) => Vec::new(),
            Err(e) => return Err(e),
        };
        let expected = self.windowed_axis();
        let got = axis.values();
        let matches = cols.len() == expected.len()
            && cols.iter().zip(expected.values()).all(|(&c, &w)| {
                let g = got[c];
                (g - w).abs() <= T::tolerance(1e-9) * w.abs().max(T::one())
            });
        if !matches {
            return Err(Error::AxisMismatch(format!(
                "sample has {} bands inside the model window, model expects {}{}",
                cols.len(),
                expected.len(),
                if cols.len() == expected.len() { " at different wavelengths" } else { "" }
            )));
        }
        let xw = x.select_columns(&cols);
        let z = stage("features", self.feature.transform(&xw))?;
        stage("predict", self.classifier.predict(&z))
    }

    pub fn class_name(&self, id: usize) -> &str {
        &self.labels[id].name
    }
}

/// Column indices of `axis` inside the window, or all columns.
pub fn window_columns<T: Scalar>(axis: &WavelengthAxis<T>, window: Option<(T, T)>) -> Result<Vec<usize>> {
    match window {
        None => Ok((0..axis.len()).collect()),
        Some((lo, hi)) => {
            if !(lo < hi) {
                return Err(Error::invalid(format!("window bounds must satisfy lo < hi (got {lo}, {hi})")));
            }
            let cols = axis.indices_within(lo, hi);
            if cols.is_empty() {
                Err(Error::EmptyWindow {
                    lo: lo.to_f64_lossy(),
                    hi: hi.to_f64_lossy(),
                })
            } else {
                Ok(cols)
            }
        }
    }
}
