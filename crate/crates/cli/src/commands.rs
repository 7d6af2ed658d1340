use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use ftirchem::data::{load_csv, load_unlabeled_csv, select_window, write_csv, CsvOptions, WavelengthAxis};
use ftirchem::evaluation::{cross_validate, grid_evaluate, sweep_csv, sweep_k, GridConfig};
use ftirchem::pipeline::{FeatureKind, FittedFeature, FittedPipeline};
use ftirchem::stats::{
    backward_eliminate, mean_spectrum_paired_t, per_band_paired_t, window_search, BfeConfig, Selection, TTestResult,
    WindowConfig, SIGNIFICANCE_LEVEL,
};
use ftirchem::synth::{generate, SynthSpec};
use ftirchem::{bundle, Dataset, Error, Pipeline};

use crate::options::{
    BfeArgs, Common, EvaluateArgs, PipelineArgs, PredictArgs, ProjectArgs, ProjectionMethod, SweepkArgs, SynthArgs,
    TrainArgs, TtestArgs, WindowArgs,
};

#[derive(Debug)]
pub enum CliError {
    Missing(PathBuf),
    Io(PathBuf, std::io::Error),
    Usage(String),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Missing(_) | CliError::Io(..) => 2,
            CliError::Lib(Error::Io(_)) => 2,
            CliError::Lib(e) if e.is_numeric() => 3,
            CliError::Lib(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Missing(p) => write!(f, "file not found: {}", p.display()),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Missing(path.to_path_buf()),
        _ => CliError::Io(path.to_path_buf(), e),
    })
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes to `--out` when given, otherwise to standard output.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_path(path: &Path, e: Error) -> CliError {
    match e {
        Error::Io(io) => CliError::Io(path.to_path_buf(), io),
        Error::Cell { .. } | Error::RaggedRow { .. } | Error::MalformedHeader(_) | Error::Empty(_) => {
            CliError::Usage(format!("{}: {e}", path.display()))
        }
        other => CliError::Lib(other),
    }
}

fn load_dataset(path: &Path) -> CliResult<Dataset> {
    let text = read_text(path)?;
    load_csv(text.as_bytes(), &CsvOptions::default()).map_err(|e| with_path(path, e))
}

fn require_data(common: &Common) -> CliResult<Dataset> {
    let path = common
        .data
        .as_deref()
        .ok_or_else(|| CliError::Usage("--data PATH is required".into()))?;
    load_dataset(path)
}

/// Defaults, then the config file, then individual flags.
fn build_config(common: &Common, flags: &PipelineArgs) -> CliResult<Pipeline> {
    let mut config = Pipeline::default();
    if let Some(path) = &common.config {
        let text = read_text(path)?;
        config.apply_text(&text).map_err(|e| match e {
            Error::Config { .. } => CliError::Usage(format!("{}: {e}", path.display())),
            other => CliError::Lib(other),
        })?;
    }
    let mut settings: Vec<(&str, String)> = Vec::new();
    let mut opt = |key: &'static str, v: Option<String>| {
        if let Some(v) = v {
            settings.push((key, v));
        }
    };
    opt("pipeline", flags.pipeline.clone());
    opt("window", common.window.clone());
    opt("folds", common.folds.map(|v| v.to_string()));
    opt("seed", common.seed.map(|v| v.to_string()));
    opt("knn.k", flags.k.map(|v| v.to_string()));
    opt("knn.metric", flags.metric.clone());
    opt("lda.components", flags.lda_components.map(|v| v.to_string()));
    opt("lda.ridge_eps_rel", flags.ridge.map(|v| v.to_string()));
    opt("lda.variant", flags.lda_variant.clone());
    opt("pca.components", flags.pca_components.map(|v| v.to_string()));
    opt("svm.c", flags.svm_c.map(|v| v.to_string()));
    opt("svm.gamma", flags.gamma.map(|v| v.to_string()));
    opt("svm.tol", flags.svm_tol.map(|v| v.to_string()));
    opt("svm.max_passes", flags.max_passes.map(|v| v.to_string()));
    for (key, value) in settings {
        config.set(key, &value).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    for kv in &flags.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE (got `{kv}`)")))?;
        config
            .set(key.trim(), value.trim())
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(config)
}

fn windowed(ds: &Dataset, config: &Pipeline) -> CliResult<Dataset> {
    Ok(match config.window {
        Some((lo, hi)) => select_window(ds, lo, hi)?,
        None => ds.clone(),
    })
}

fn pooled_score(config: &Pipeline) -> impl Fn(&Dataset) -> ftirchem::Result<f64> + Sync + '_ {
    move |sub| cross_validate(sub, config).map(|r| r.balanced_accuracy)
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult {
    let ds = require_data(&args.common)?;
    let config = build_config(&args.common, &args.pipeline)?;
    let (csv, text) = if args.grid {
        let report = grid_evaluate(&ds, &GridConfig::full(config))?;
        let names: Vec<String> = ds.labels().iter().map(|l| l.name.clone()).collect();
        print!("{}", report.to_text());
        (report.to_csv(&names), report.to_text())
    } else {
        let report = cross_validate(&ds, &config)?;
        println!("pipeline {}", config.name());
        println!("balanced_accuracy {:.6}", report.balanced_accuracy);
        (report.to_csv(), report.to_text())
    };
    if let Some(prefix) = &args.common.out {
        write_text(&suffixed(prefix, "csv"), &csv)?;
        write_text(&suffixed(prefix, "txt"), &text)?;
    }
    Ok(())
}

fn suffixed(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn train(args: &TrainArgs) -> CliResult {
    let out = args
        .common
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("--out PATH is required for the model file".into()))?;
    let ds = require_data(&args.common)?;
    let config = build_config(&args.common, &args.pipeline)?;
    let model = FittedPipeline::fit(&ds, &config)?;
    write_text(out, &bundle::write_model(&model))?;
    println!(
        "trained {} on {} samples, {} bands in window",
        config.name(),
        ds.n_samples(),
        model.window_columns.len()
    );
    Ok(())
}

pub fn predict(args: &PredictArgs) -> CliResult {
    let model_text = read_text(&args.model)?;
    let model = bundle::read_model::<f64>(&model_text).map_err(|e| match e {
        Error::ModelFormat { .. } => CliError::Usage(format!("{}: {e}", args.model.display())),
        other => CliError::Lib(other),
    })?;
    let sample_text = read_text(&args.sample)?;
    let (axis, x) = load_unlabeled_csv::<f64, _>(sample_text.as_bytes()).map_err(|e| with_path(&args.sample, e))?;
    let ids = model.predict_on_axis(&axis, &x)?;
    let mut s = String::new();
    for id in ids {
        let _ = writeln!(s, "{}", model.class_name(id));
    }
    print!("{s}");
    Ok(())
}

fn class_rows(ds: &Dataset, name: &str) -> CliResult<Vec<usize>> {
    let id = ds
        .class_id(name)
        .ok_or_else(|| CliError::Usage(format!("class `{name}` not present in the dataset")))?;
    Ok((0..ds.n_samples()).filter(|&i| ds.y()[i] == id).collect())
}

fn ttest_line(out: &mut String, r: &TTestResult<f64>) {
    let _ = writeln!(
        out,
        "{:.10e},{},{:.10e},{:.10e},{:.10e},{}",
        r.t,
        r.df,
        r.p,
        r.mean_diff,
        r.sd_diff,
        r.significant(SIGNIFICANCE_LEVEL)
    );
}

pub fn ttest(args: &TtestArgs) -> CliResult {
    let ds = windowed_from(&args.common)?;
    let (a, b) = match &args.data_b {
        Some(path) => {
            if args.label_a.is_some() || args.label_b.is_some() {
                return Err(CliError::Usage("--data-b cannot be combined with --label-a/--label-b".into()));
            }
            let other = load_dataset(path)?;
            let other = match parse_common_window(&args.common)? {
                Some((lo, hi)) => select_window(&other, lo, hi)?,
                None => other,
            };
            if !same_axis(ds.axis(), other.axis()) {
                return Err(Error::AxisMismatch("the two files use different wavelengths".into()).into());
            }
            (ds.x().clone(), other.x().clone())
        }
        None => {
            let name_a = args.label_a.clone().unwrap_or_else(|| ds.class_name(0).to_string());
            let name_b = match &args.label_b {
                Some(n) => n.clone(),
                None if ds.n_classes() > 1 => ds.class_name(1).to_string(),
                None => return Err(CliError::Usage("dataset has a single class; give --data-b".into())),
            };
            let (ra, rb) = (class_rows(&ds, &name_a)?, class_rows(&ds, &name_b)?);
            if ra.len() != rb.len() {
                return Err(CliError::Usage(format!(
                    "classes `{name_a}` ({}) and `{name_b}` ({}) differ in size and cannot be paired",
                    ra.len(),
                    rb.len()
                )));
            }
            (ds.x().select_rows(&ra), ds.x().select_rows(&rb))
        }
    };
    let mut s = String::new();
    if args.per_band {
        s.push_str("wavelength,t,df,p,mean_diff,sd_diff,significant\n");
        for (w, r) in ds.axis().values().iter().zip(per_band_paired_t(&a, &b)?) {
            let _ = write!(s, "{w},");
            match r {
                Ok(r) => ttest_line(&mut s, &r),
                Err(_) => s.push_str(",,,,,\n"),
            }
        }
    } else {
        s.push_str("t,df,p,mean_diff,sd_diff,significant\n");
        ttest_line(&mut s, &mean_spectrum_paired_t(&a, &b)?);
    }
    emit(args.common.out.as_deref(), &s)
}

fn same_axis(a: &WavelengthAxis<f64>, b: &WavelengthAxis<f64>) -> bool {
    a.len() == b.len()
        && a
            .values()
            .iter()
            .zip(b.values())
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0))
}

fn parse_common_window(common: &Common) -> CliResult<Option<(f64, f64)>> {
    common
        .window
        .as_deref()
        .filter(|w| *w != "none")
        .map(|w| ftirchem::pipeline::parse_window(w).map_err(|e| CliError::Usage(e.to_string())))
        .transpose()
}

fn windowed_from(common: &Common) -> CliResult<Dataset> {
    let ds = require_data(common)?;
    Ok(match parse_common_window(common)? {
        Some((lo, hi)) => select_window(&ds, lo, hi)?,
        None => ds,
    })
}

pub fn bfe(args: &BfeArgs) -> CliResult {
    let ds = require_data(&args.common)?;
    let mut config = build_config(&args.common, &args.pipeline)?;
    let ds = windowed(&ds, &config)?;
    config.window = None;
    let bfe = BfeConfig {
        tolerance: args.tolerance,
        min_features: args.min_features,
    };
    let trace = backward_eliminate(&ds, pooled_score(&config), &bfe)?;
    emit(args.common.out.as_deref(), &trace.to_csv())?;
    if let Selection::Features(kept) = &trace.selected {
        eprintln!("kept {} of {} bands, score {:.6}", kept.len(), ds.n_features(), trace.score);
    }
    Ok(())
}

pub fn window(args: &WindowArgs) -> CliResult {
    let ds = require_data(&args.common)?;
    let mut config = build_config(&args.common, &args.pipeline)?;
    let ds = windowed(&ds, &config)?;
    config.window = None;
    let wc = WindowConfig {
        grid_step: args.grid_step,
        min_width: args.min_width,
    };
    let trace = window_search(&ds, pooled_score(&config), &wc)?;
    emit(args.common.out.as_deref(), &trace.to_csv())?;
    if let Selection::Window { lo_nm, hi_nm, .. } = trace.selected {
        eprintln!("best window {lo_nm}:{hi_nm}, score {:.6}", trace.score);
    }
    Ok(())
}

pub fn sweepk(args: &SweepkArgs) -> CliResult {
    if args.kmax == 0 {
        return Err(CliError::Usage("--kmax must be at least 1".into()));
    }
    let ds = require_data(&args.common)?;
    let config = build_config(&args.common, &args.pipeline)?;
    let ks: Vec<usize> = (1..=args.kmax).collect();
    let rows = sweep_k(&ds, &config, &ks)?;
    emit(args.common.out.as_deref(), &sweep_csv(&rows))
}

pub fn project(args: &ProjectArgs) -> CliResult {
    let ds = require_data(&args.common)?;
    let config = build_config(&args.common, &args.pipeline)?;
    let ds = windowed(&ds, &config)?;
    let mut hyper = config.hyper;
    let kind = match args.method {
        ProjectionMethod::Lda => {
            hyper.lda.components = Some(2);
            FeatureKind::Lda
        }
        ProjectionMethod::Pca => {
            hyper.pca_components = 2;
            FeatureKind::Pca
        }
    };
    let feature = FittedFeature::fit(&ds, kind, &hyper)?;
    let z = feature.transform(ds.x())?;
    if z.cols() < 2 {
        return Err(CliError::Usage(format!(
            "projection has {} component(s); two are needed",
            z.cols()
        )));
    }
    let mut s = String::from("component1,component2,label\n");
    for i in 0..z.rows() {
        let _ = writeln!(s, "{:e},{:e},{}", z[(i, 0)], z[(i, 1)], ds.class_name(ds.y()[i]));
    }
    emit(args.common.out.as_deref(), &s)
}

pub fn synth(args: &SynthArgs) -> CliResult {
    let defaults = SynthSpec::<f64>::default();
    let spec = SynthSpec {
        n_per_class: args.n_per_class,
        axis: WavelengthAxis::linspace(2500.0, 4000.0, args.points).map_err(|e| CliError::Usage(e.to_string()))?,
        peak_center_nm: args.peak_center,
        peak_width_nm: args.peak_width,
        water_gain: args.water_gain,
        noise_sd: args.noise_sd,
        seed: args.seed,
        ..defaults
    };
    let ds = generate(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf = Vec::new();
    write_csv(&ds, &mut buf)?;
    write_text(&args.out, &String::from_utf8(buf).expect("CSV output is UTF-8"))?;
    println!(
        "wrote {} samples x {} bands to {}",
        ds.n_samples(),
        ds.n_features(),
        args.out.display()
    );
    Ok(())
}
