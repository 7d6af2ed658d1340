use ftirchem::data::{
    label_table, load_csv, select_window, stratified_folds, stratify, write_csv, CsvOptions, SpectralDataset,
    WavelengthAxis,
};
use ftirchem::Matrix;
use proptest::prelude::*;

fn random_dataset() -> impl Strategy<Value = SpectralDataset<f64>> {
    (1usize..8, 1usize..12, 1usize..4).prop_flat_map(|(d, n, c)| {
        (
            prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, n * d),
            prop::collection::vec(0..c, n),
            prop::collection::vec(0.5f64..50.0, d),
        )
            .prop_map(move |(vals, mut y, gaps)| {
                // every class present
                for (i, slot) in y.iter_mut().enumerate().take(c.min(n)) {
                    *slot = i;
                }
                let c_eff = c.min(n);
                let y: Vec<usize> = y.into_iter().map(|v| v % c_eff).collect();
                let mut w = 2500.0;
                let axis: Vec<f64> = gaps
                    .iter()
                    .map(|g| {
                        w += g;
                        w
                    })
                    .collect();
                let names: Vec<String> = (0..c_eff).map(|i| format!("class_{i}")).collect();
                SpectralDataset::new(
                    Matrix::from_vec(n, d, vals).unwrap(),
                    y,
                    WavelengthAxis::new(axis).unwrap(),
                    label_table(&names).unwrap(),
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn csv_round_trip_is_exact(ds in random_dataset()) {
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back: SpectralDataset<f64> = load_csv(buf.as_slice(), &CsvOptions::default()).unwrap();
        prop_assert_eq!(back.x(), ds.x());
        prop_assert_eq!(back.axis(), ds.axis());
        // class ids follow first appearance, so compare by name
        for i in 0..ds.n_samples() {
            prop_assert_eq!(back.class_name(back.y()[i]), ds.class_name(ds.y()[i]));
        }
    }

    #[test]
    fn stratified_folds_partition_and_balance(
        counts in prop::collection::vec(5usize..30, 1..5),
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
        let f = stratify(&labels, counts.len(), k, seed, false).unwrap();
        prop_assert_eq!(f.fold_of.len(), labels.len());
        prop_assert!(f.fold_of.iter().all(|&x| x < k));
        let sizes = f.fold_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for c in 0..counts.len() {
            let mut per = vec![0usize; k];
            for (i, &l) in labels.iter().enumerate() {
                if l == c {
                    per[f.fold_of[i]] += 1;
                }
            }
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        for fold in 0..k {
            let mut all = f.test_indices(fold);
            all.extend(f.train_indices(fold));
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        }
        prop_assert_eq!(stratify(&labels, counts.len(), k, seed, false).unwrap(), f);
    }
}

#[test]
fn seeds_change_assignments() {
    let labels: Vec<usize> = (0..42).map(|i| i / 14).collect();
    let a = stratify(&labels, 3, 5, 1, false).unwrap();
    let b = stratify(&labels, 3, 5, 2, false).unwrap();
    assert_ne!(a.fold_of, b.fold_of);
}

#[test]
fn relaxed_stratification_allows_small_classes() {
    let labels = vec![0, 0, 0, 0, 0, 1, 1];
    assert!(stratify(&labels, 2, 3, 0, false).is_err());
    let f = stratify(&labels, 2, 3, 0, true).unwrap();
    assert_eq!(f.fold_sizes().iter().sum::<usize>(), 7);
}

#[test]
fn window_on_loaded_file() {
    let src = "label,3100,3150,3500,3840,3900\na,1,2,3,4,5\nb,6,7,8,9,10\n";
    let ds: SpectralDataset<f64> = load_csv(src.as_bytes(), &CsvOptions::default()).unwrap();
    let w = select_window(&ds, 3150.0, 3840.0).unwrap();
    assert_eq!(w.axis().values(), &[3150.0, 3500.0, 3840.0]);
    assert_eq!(w.x().row(1), &[7.0, 8.0, 9.0]);
    assert!(select_window(&ds, 3200.0, 3300.0).is_err());
    let folds = stratified_folds(&ds, 2, 0);
    assert!(folds.is_err(), "one sample per class cannot fill two folds strictly");
}
