//! Text serialization of fitted pipelines.
//!
//! A bundle is one UTF-8 file:
//!
//! ```text
//! ftirchem-model 1
//! @config
//! <pipeline configuration text>
//! @axis
//! values = 2500,2502.06,...
//! @labels
//! 0 = authentic
//! @window
//! columns = 0,1,2,...
//! @features
//! kind = lda
//! ...
//! @classifier
//! kind = knn
//! ...
//! @end
//! ```
//!
//! Matrices are written as `rows cols v,v,...` in row-major order. Floats use
//! 17 significant digits so that reading a bundle back is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::classifiers::{Kernel, KnnModel, Metric, SvmBinaryModel, SvmMulticlassModel};
use crate::data::{label_table, WavelengthAxis};
use crate::error::{Error, Result};
use crate::features::{ClassStatistics, LdaModel, LdaVariant, PcaModel};
use crate::matrix::Matrix;
use crate::pipeline::{FittedClassifier, FittedFeature, FittedPipeline, PipelineConfig};
use crate::scalar::Scalar;

const MAGIC: &str = "ftirchem-model 1";

fn num<T: Scalar>(v: T) -> String {
    format!("{v:.16e}")
}

fn list<T: Scalar>(v: &[T]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")
}

fn ints(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn mat<T: Scalar>(m: &Matrix<T>) -> String {
    format!("{} {} {}", m.rows(), m.cols(), list(m.as_slice()))
}

struct Writer(String);

impl Writer {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key} = {value}");
    }

    fn section(&mut self, name: &str) {
        let _ = writeln!(self.0, "@{name}");
    }
}

pub fn write_model<T: Scalar>(p: &FittedPipeline<T>) -> String {
    let mut w = Writer(format!("{MAGIC}\n"));
    w.section("config");
    w.0.push_str(&p.config.to_text());
    w.section("axis");
    w.kv("values", list(p.axis.values()));
    w.section("labels");
    for l in &p.labels {
        w.kv(&l.id.to_string(), &l.name);
    }
    w.section("window");
    w.kv("columns", ints(&p.window_columns));

    w.section("features");
    match &p.feature {
        FittedFeature::Original => w.kv("kind", "original"),
        FittedFeature::Pca(m) => {
            w.kv("kind", "pca");
            w.kv("mean", list(&m.mean));
            w.kv("components", mat(&m.components));
            w.kv("explained_variance", list(&m.explained_variance));
        }
        FittedFeature::Lda(m) => {
            w.kv("kind", "lda");
            w.kv("variant", m.variant.name());
            w.kv("components", m.components);
            w.kv("ridge_eps_rel", num(m.ridge_eps_rel));
            w.kv("projection", mat(&m.projection));
            w.kv("eigenvalues", list(&m.eigenvalues));
            w.kv("global_mean", list(&m.stats.global_mean));
            w.kv("class_means", mat(&m.stats.class_means));
            w.kv("class_counts", ints(&m.stats.class_counts));
            w.kv("priors", list(&m.stats.priors));
        }
    }

    w.section("classifier");
    match &p.classifier {
        FittedClassifier::Knn(m) => {
            w.kv("kind", "knn");
            w.kv("k", m.k);
            w.kv("metric", m.metric.name());
            w.kv("exemplars", mat(&m.exemplars));
            w.kv("labels", ints(&m.labels));
        }
        FittedClassifier::Svm(m) => {
            w.kv("kind", "svm");
            w.kv("n_classes", m.n_classes);
            w.kv("machines", m.pairwise.len());
            for (i, (a, b, svm)) in m.pairwise.iter().enumerate() {
                w.kv(&format!("m{i}.pair"), format!("{a} {b}"));
                match svm.kernel {
                    Kernel::Linear => w.kv(&format!("m{i}.kernel"), "linear"),
                    Kernel::Rbf { gamma } => w.kv(&format!("m{i}.kernel"), format!("rbf {}", num(gamma))),
                }
                w.kv(&format!("m{i}.c"), num(svm.c_param));
                w.kv(&format!("m{i}.bias"), num(svm.bias));
                w.kv(&format!("m{i}.converged"), svm.converged);
                w.kv(&format!("m{i}.alphas"), list(&svm.alphas));
                w.kv(&format!("m{i}.support_vectors"), mat(&svm.support_vectors));
            }
        }
    }
    w.section("end");
    w.0
}

struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn get(&self, key: &str) -> Result<(usize, &str)> {
        self.entries
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::ModelFormat {
                line: self.line,
                message: format!("missing key `{key}`"),
            })
    }

    fn parse<V: FromStr>(&self, key: &str) -> Result<V> {
        let (line, v) = self.get(key)?;
        parse_at(line, key, v)
    }

    fn list<V: FromStr>(&self, key: &str) -> Result<Vec<V>> {
        let (line, v) = self.get(key)?;
        parse_list(line, key, v)
    }

    fn matrix<T: Scalar>(&self, key: &str) -> Result<Matrix<T>> {
        let (line, v) = self.get(key)?;
        let mut it = v.splitn(3, ' ');
        let rows: usize = parse_at(line, key, it.next().unwrap_or(""))?;
        let cols: usize = parse_at(line, key, it.next().unwrap_or(""))?;
        let data: Vec<T> = parse_list(line, key, it.next().unwrap_or(""))?;
        if data.len() != rows * cols {
            return Err(Error::ModelFormat {
                line,
                message: format!("`{key}`: {rows}x{cols} matrix needs {} values, found {}", rows * cols, data.len()),
            });
        }
        Matrix::from_vec(rows, cols, data).map_err(|e| Error::ModelFormat {
            line,
            message: format!("`{key}`: {e}"),
        })
    }
}

fn parse_at<V: FromStr>(line: usize, key: &str, v: &str) -> Result<V> {
    v.trim().parse().map_err(|_| Error::ModelFormat {
        line,
        message: format!("`{key}`: cannot parse `{v}`"),
    })
}

fn parse_list<V: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<V>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| parse_at(line, key, s)).collect()
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::ModelFormat {
        line,
        message: message.into(),
    }
}

pub fn read_model<T: Scalar>(text: &str) -> Result<FittedPipeline<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(bad(1, format!("expected `{MAGIC}`"))),
    }
    let mut config_text = String::new();
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut ended = false;
    for (n, raw) in lines {
        if let Some(name) = raw.strip_prefix('@') {
            let name = name.trim().to_string();
            if name == "end" {
                ended = true;
                break;
            }
            if sections.contains_key(&name) || (name == "config" && !config_text.is_empty()) {
                return Err(bad(n, format!("duplicate section `@{name}`")));
            }
            if name != "config" {
                sections.insert(
                    name.clone(),
                    Section {
                        line: n,
                        entries: BTreeMap::new(),
                    },
                );
            }
            current = Some(name);
            continue;
        }
        match current.as_deref() {
            None => return Err(bad(n, "content before the first section")),
            Some("config") => {
                config_text.push_str(raw);
                config_text.push('\n');
            }
            Some(name) => {
                if raw.trim().is_empty() {
                    continue;
                }
                let (k, v) = raw
                    .split_once(" = ")
                    .ok_or_else(|| bad(n, format!("expected `key = value`, found `{raw}`")))?;
                let sec = sections.get_mut(name).expect("section registered");
                if sec.entries.insert(k.trim().to_string(), (n, v.to_string())).is_some() {
                    return Err(bad(n, format!("duplicate key `{}`", k.trim())));
                }
            }
        }
    }
    if !ended {
        return Err(bad(text.lines().count(), "missing `@end`"));
    }
    let section = |name: &str| {
        sections
            .get(name)
            .ok_or_else(|| bad(1, format!("missing section `@{name}`")))
    };

    let config = PipelineConfig::from_text(&config_text)?;
    let axis_sec = section("axis")?;
    let axis = WavelengthAxis::new(axis_sec.list("values")?)
        .map_err(|e| bad(axis_sec.get("values").map_or(axis_sec.line, |x| x.0), e.to_string()))?;

    let label_sec = section("labels")?;
    let mut names = Vec::with_capacity(label_sec.entries.len());
    for id in 0..label_sec.entries.len() {
        let (_, name) = label_sec.get(&id.to_string())?;
        names.push(name.to_string());
    }
    let labels = label_table(&names).map_err(|e| bad(label_sec.line, e.to_string()))?;

    let win_sec = section("window")?;
    let window_columns: Vec<usize> = win_sec.list("columns")?;
    if window_columns.is_empty()
        || window_columns.windows(2).any(|w| w[0] >= w[1])
        || window_columns.last().is_some_and(|&c| c >= axis.len())
    {
        return Err(bad(win_sec.line, "window columns must be increasing and inside the axis"));
    }

    let fs = section("features")?;
    let (kind_line, kind) = fs.get("kind")?;
    let feature = match kind {
        "original" => FittedFeature::Original,
        "pca" => FittedFeature::Pca(PcaModel {
            mean: fs.list("mean")?,
            components: fs.matrix("components")?,
            explained_variance: fs.list("explained_variance")?,
        }),
        "lda" => {
            let (vl, v) = fs.get("variant")?;
            FittedFeature::Lda(LdaModel {
                stats: ClassStatistics {
                    global_mean: fs.list("global_mean")?,
                    class_means: fs.matrix("class_means")?,
                    class_counts: fs.list("class_counts")?,
                    priors: fs.list("priors")?,
                },
                projection: fs.matrix("projection")?,
                eigenvalues: fs.list("eigenvalues")?,
                components: fs.parse("components")?,
                variant: LdaVariant::parse(v).ok_or_else(|| bad(vl, format!("unknown LDA variant `{v}`")))?,
                ridge_eps_rel: fs.parse("ridge_eps_rel")?,
            })
        }
        other => return Err(bad(kind_line, format!("unknown feature kind `{other}`"))),
    };

    let cs = section("classifier")?;
    let (kind_line, kind) = cs.get("kind")?;
    let classifier = match kind {
        "knn" => {
            let (ml, m) = cs.get("metric")?;
            FittedClassifier::Knn(KnnModel {
                exemplars: cs.matrix("exemplars")?,
                labels: cs.list("labels")?,
                k: cs.parse("k")?,
                metric: Metric::parse(m).ok_or_else(|| bad(ml, format!("unknown metric `{m}`")))?,
            })
        }
        "svm" => {
            let n_classes: usize = cs.parse("n_classes")?;
            let machines: usize = cs.parse("machines")?;
            let mut pairwise = Vec::with_capacity(machines);
            for i in 0..machines {
                let (pl, pair) = cs.get(&format!("m{i}.pair"))?;
                let ab: Vec<usize> = pair
                    .split(' ')
                    .map(|s| parse_at(pl, "pair", s))
                    .collect::<Result<_>>()?;
                let [a, b] = ab[..] else {
                    return Err(bad(pl, "pair needs two class ids"));
                };
                let (kl, k) = cs.get(&format!("m{i}.kernel"))?;
                let kernel = match k.split_once(' ') {
                    None if k == "linear" => Kernel::Linear,
                    Some(("rbf", g)) => Kernel::Rbf {
                        gamma: parse_at(kl, "kernel", g)?,
                    },
                    _ => return Err(bad(kl, format!("unknown kernel `{k}`"))),
                };
                pairwise.push((
                    a,
                    b,
                    SvmBinaryModel {
                        support_vectors: cs.matrix(&format!("m{i}.support_vectors"))?,
                        alphas: cs.list(&format!("m{i}.alphas"))?,
                        bias: cs.parse(&format!("m{i}.bias"))?,
                        kernel,
                        c_param: cs.parse(&format!("m{i}.c"))?,
                        converged: cs.parse(&format!("m{i}.converged"))?,
                    },
                ));
            }
            FittedClassifier::Svm(SvmMulticlassModel { n_classes, pairwise })
        }
        other => return Err(bad(kind_line, format!("unknown classifier kind `{other}`"))),
    };

    Ok(FittedPipeline {
        config,
        axis,
        window_columns,
        feature,
        classifier,
        labels,
    })
}
