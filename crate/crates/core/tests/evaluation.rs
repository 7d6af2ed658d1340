mod oracles;

use ftirchem::data::{label_table, stratified_folds, SpectralDataset, WavelengthAxis};
use ftirchem::evaluation::{
    balanced_accuracy, confusion_matrix, cross_validate, cross_validate_with, cross_validate_with_folds,
    grid_evaluate, sweep_k, ConfusionMatrix, GridConfig,
};
use ftirchem::pipeline::{ClassifierKind, FeatureKind, FittedPipeline, PipelineConfig};
use ftirchem::{Error, Matrix};
use proptest::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

fn blob_dataset(seed: u64, per: usize, dim: usize, spacing: f64) -> SpectralDataset<f64> {
    let (rows, y) = oracles::blobs(seed, per, 3, dim, spacing);
    SpectralDataset::new(
        Matrix::from_rows(&rows).unwrap(),
        y,
        WavelengthAxis::linspace(3000.0, 3500.0, dim).unwrap(),
        label_table(&["authentic", "adulterated10", "adulterated20"]).unwrap(),
    )
    .unwrap()
}

#[test]
fn constant_predictor_scores_one_over_c() {
    let ds = blob_dataset(1, 15, 3, 4.0);
    let folds = stratified_folds(&ds, 5, 42).unwrap();
    let r = cross_validate_with(&ds, &folds, String::new(), |_, test| Ok(vec![0; test.rows()])).unwrap();
    assert!((r.balanced_accuracy - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(r.per_class_recall, vec![1.0, 0.0, 0.0]);
}

#[test]
fn random_predictor_is_near_chance() {
    let per = 1000;
    let ds = blob_dataset(2, per, 1, 0.0);
    let folds = stratified_folds(&ds, 5, 42).unwrap();
    let r = cross_validate_with(&ds, &folds, String::new(), |_, test| {
        let mut rng = SplitMix64::seed_from_u64(test.rows() as u64 + 17);
        Ok((0..test.rows()).map(|_| (rng.next_u64() % 3) as usize).collect())
    })
    .unwrap();
    // recall_i ~ Binomial(per, 1/3)/per; mean of three independent-ish recalls
    let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / per as f64).sqrt() / 3f64.sqrt();
    assert!((r.balanced_accuracy - 1.0 / 3.0).abs() <= 3.0 * sigma, "{}", r.balanced_accuracy);
}

#[test]
fn pooled_is_sum_of_folds() {
    let ds = blob_dataset(3, 12, 4, 2.0);
    let r = cross_validate(&ds, &PipelineConfig::default()).unwrap();
    let mut sum = ConfusionMatrix::new(3);
    for f in &r.per_fold {
        sum.merge(&f.confusion).unwrap();
    }
    assert_eq!(sum, r.pooled);
    assert_eq!(r.pooled.total(), ds.n_samples());
    assert!(r.predictions.iter().all(|&p| p < 3));
    assert!(r.config_echo.contains("seed = 42"));
}

#[test]
fn held_out_labels_do_not_leak() {
    let ds = blob_dataset(4, 10, 5, 1.5);
    let config = PipelineConfig::default();
    let folds = stratified_folds(&ds, 5, 42).unwrap();
    let base = cross_validate_with_folds(&ds, &config, &folds).unwrap();
    for fold in 0..folds.k {
        // rotate the labels inside one held-out fold
        let test = folds.test_indices(fold);
        let mut y = ds.y().to_vec();
        let first = y[test[0]];
        for w in test.windows(2) {
            y[w[0]] = y[w[1]];
        }
        y[*test.last().unwrap()] = first;
        let shuffled = ds.with_labels(y).unwrap();
        let other = cross_validate_with_folds(&shuffled, &config, &folds).unwrap();
        for &i in &test {
            assert_eq!(base.predictions[i], other.predictions[i]);
        }
    }
    // the held-out samples do change the model when included
    let train = ds.subset_rows(&folds.train_indices(0));
    let partial = FittedPipeline::fit(&train, &config).unwrap();
    let full = FittedPipeline::fit(&ds, &config).unwrap();
    assert_ne!(partial.feature, full.feature);
}

#[test]
fn stage_failure_names_fold_and_stage() {
    let ds = blob_dataset(5, 10, 3, 3.0);
    let mut config = PipelineConfig::default();
    config.hyper.knn_k = 1000;
    match cross_validate(&ds, &config).unwrap_err() {
        Error::Stage { fold, stage, .. } => {
            assert_eq!(fold, Some(0));
            assert_eq!(stage, "classifier");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn grid_cells_share_folds() {
    let ds = blob_dataset(6, 12, 4, 3.0);
    let base = PipelineConfig::default();
    let grid = GridConfig {
        base,
        features: vec![FeatureKind::Lda, FeatureKind::Lda],
        classifiers: vec![ClassifierKind::Knn],
    };
    let g = grid_evaluate(&ds, &grid).unwrap();
    assert_eq!(g.cells.len(), 2);
    assert_eq!(g.cells[0].outcome, g.cells[1].outcome);
    let single = cross_validate(&ds, &base).unwrap();
    assert_eq!(g.cells[0].balanced_accuracy(), Some(single.balanced_accuracy));
}

#[test]
fn full_grid_has_nine_cells_and_marks_failures() {
    let ds = blob_dataset(7, 10, 4, 4.0);
    let mut base = PipelineConfig::default();
    base.hyper.pca_components = 50;
    let g = grid_evaluate(&ds, &GridConfig::full(base)).unwrap();
    assert_eq!(g.cells.len(), 9);
    for c in &g.cells {
        assert_eq!(c.outcome.is_err(), c.features == FeatureKind::Pca);
    }
    let text = g.to_text();
    assert!(text.contains("failed"));
    assert!(text.contains("lda"));
    assert_eq!(g.to_csv(&[]).lines().count(), 10);
}

#[test]
fn constant_features_give_chance_everywhere() {
    let n = 30;
    let ds = SpectralDataset::new(
        Matrix::from_fn(n, 4, |_, _| 0.5),
        (0..n).map(|i| i / 10).collect(),
        WavelengthAxis::linspace(3000.0, 3100.0, 4).unwrap(),
        label_table(&["a", "b", "c"]).unwrap(),
    )
    .unwrap();
    let g = grid_evaluate(&ds, &GridConfig::full(PipelineConfig::default())).unwrap();
    for c in &g.cells {
        if let Some(a) = c.balanced_accuracy() {
            assert!((a - 1.0 / 3.0).abs() < 0.15, "{:?}+{:?}: {a}", c.features, c.classifier);
        }
    }
}

#[test]
fn sweep_is_deterministic() {
    let ds = blob_dataset(8, 12, 4, 1.0);
    let r = sweep_k(&ds, &PipelineConfig::default(), &[3, 1, 3]).unwrap();
    assert_eq!(r.len(), 3);
    assert_eq!(r[0], r[2]);
    assert_eq!(sweep_k(&ds, &PipelineConfig::default(), &[5]).unwrap().len(), 1);
    assert!(sweep_k(&ds, &PipelineConfig::default(), &[0]).is_err());
    assert!(sweep_k(&ds, &PipelineConfig::default(), &[1000]).is_err());
}

#[test]
fn blobs_score_high() {
    let ds = blob_dataset(9, 20, 6, 6.0);
    let r = cross_validate(&ds, &PipelineConfig::default()).unwrap();
    assert!(r.balanced_accuracy >= 0.95);
    // nearest-centroid oracle agrees the blobs are separable
    let rows: Vec<Vec<f64>> = ds.x().row_iter().map(<[f64]>::to_vec).collect();
    let hits = rows
        .iter()
        .zip(ds.y())
        .filter(|(r, &l)| oracles::nearest_centroid(&rows, ds.y(), 3, r) == l)
        .count();
    assert!(hits as f64 / rows.len() as f64 >= 0.95);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn confusion_is_permutation_invariant(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60), seed in any::<u64>()) {
        let (t, p): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let a = confusion_matrix(&t, &p, 4).unwrap();
        let mut shuffled = pairs.clone();
        let mut rng = SplitMix64::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
        }
        let (t2, p2): (Vec<usize>, Vec<usize>) = shuffled.into_iter().unzip();
        prop_assert_eq!(&a, &confusion_matrix(&t2, &p2, 4).unwrap());
        prop_assert_eq!(a.total(), pairs.len());
    }

    #[test]
    fn binary_balanced_accuracy_is_mean_of_sens_and_spec(tp in 0usize..50, fn_ in 0usize..50, fp in 0usize..50, tn in 0usize..50) {
        prop_assume!(tp + fn_ > 0 && fp + tn > 0);
        let cm = ConfusionMatrix::from_counts(&[[tp, fn_], [fp, tn]]).unwrap();
        let sens = tp as f64 / (tp + fn_) as f64;
        let spec = tn as f64 / (fp + tn) as f64;
        prop_assert!((balanced_accuracy(&cm).unwrap() - (sens + spec) / 2.0).abs() < 1e-15);
    }
}
