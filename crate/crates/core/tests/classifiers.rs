mod oracles;

use ftirchem::classifiers::{
    dual_objective, fit_knn, fit_svm_binary, fit_svm_multiclass, predict_knn, predict_svm_binary,
    predict_svm_multiclass, smo_solve, Kernel, KernelSpec, Metric, SmoParams, SvmBinaryModel,
};
use ftirchem::Matrix;
use oracles::{blobs, brute_force_dual, kkt_violation, knn_oracle};
use proptest::prelude::*;

fn to_matrix(rows: &[Vec<f64>]) -> Matrix<f64> {
    Matrix::from_rows(rows).unwrap()
}

/// Integer coordinates in a small box, so distance and vote ties are common.
fn knn_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, Vec<f64>, usize, bool)> {
    (1usize..=4, 1usize..=25, 2usize..=4).prop_flat_map(|(d, n, c)| {
        (
            prop::collection::vec(prop::collection::vec((-3i32..=3).prop_map(f64::from), d), n),
            prop::collection::vec(0..c, n),
            prop::collection::vec((-3i32..=3).prop_map(f64::from), d),
            1..=n,
            any::<bool>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn knn_matches_exhaustive_scan((rows, labels, q, k, manhattan) in knn_case()) {
        let metric = if manhattan { Metric::Manhattan } else { Metric::Euclidean };
        let m = fit_knn(&to_matrix(&rows), &labels, k, metric).unwrap();
        prop_assert_eq!(predict_knn(&m, &q).unwrap(), knn_oracle(&rows, &labels, &q, k, manhattan));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn knn_ignores_row_order_with_distinct_distances(
        rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 5..30),
        q in prop::collection::vec(-100.0f64..100.0, 3),
        k in 1usize..5,
        seed in any::<u64>(),
    ) {
        let labels: Vec<usize> = (0..rows.len()).map(|i| i % 3).collect();
        let mut perm: Vec<usize> = (0..rows.len()).collect();
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let prows: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let plabels: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
        let a = fit_knn(&to_matrix(&rows), &labels, k, Metric::Euclidean).unwrap();
        let b = fit_knn(&to_matrix(&prows), &plabels, k, Metric::Euclidean).unwrap();
        prop_assert_eq!(predict_knn(&a, &q).unwrap(), predict_knn(&b, &q).unwrap());
    }
}

fn svm_case(max_n: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, bool, f64, f64)> {
    (4usize..=max_n, 1usize..=3).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, d), n),
            prop::collection::vec(any::<bool>(), n),
            any::<bool>(),
            0.1f64..10.0,
            0.2f64..3.0,
        )
            .prop_filter("both labels", |(_, l, ..)| l.iter().any(|&b| b) && l.iter().any(|&b| !b))
            .prop_map(|(x, l, rbf, c, g)| (x, l.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect(), rbf, c, g))
    })
}

fn kernel_of(rbf: bool, gamma: f64) -> Kernel<f64> {
    if rbf {
        Kernel::Rbf { gamma }
    } else {
        Kernel::Linear
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn smo_satisfies_kkt((x, y, rbf, c, gamma) in svm_case(30)) {
        let xm = to_matrix(&x);
        let kernel = kernel_of(rbf, gamma);
        let params = SmoParams { c, ..SmoParams::default() };
        let sol = smo_solve(&kernel.gram(&xm), &y, &params).unwrap();
        prop_assert!(sol.converged);
        let model = SvmBinaryModel::from_solution(&xm, &y, &sol, kernel, c);
        let margins: Vec<f64> = x.iter().zip(&y).map(|(r, yi)| yi * predict_svm_binary(&model, r).unwrap()).collect();
        prop_assert!(kkt_violation(&sol.alphas, &margins, c) <= params.tol);
        let balance: f64 = model.alphas.iter().sum();
        prop_assert!(balance.abs() <= 1e-8);
        prop_assert!(model.alphas.iter().all(|a| a.abs() > 0.0 && a.abs() <= c));
    }

    #[test]
    fn smo_reaches_dual_optimum((x, y, rbf, c, gamma) in svm_case(7)) {
        let xm = to_matrix(&x);
        let k = kernel_of(rbf, gamma).gram(&xm);
        // the default tol bounds KKT violation, not objective suboptimality
        let sol = smo_solve(&k, &y, &SmoParams { c, tol: 1e-5, ..SmoParams::default() }).unwrap();
        let krows: Vec<Vec<f64>> = (0..k.rows()).map(|i| k.row(i).to_vec()).collect();
        let (best, _) = brute_force_dual(&krows, &y, c);
        let got = dual_objective(&sol.alphas, &y, &k);
        prop_assert!(got <= best + 1e-9);
        prop_assert!(best - got <= 1e-4, "SMO {} vs exact {}", got, best);
    }

    #[test]
    fn label_swap_negates_scores((x, y, rbf, c, gamma) in svm_case(20), q in prop::collection::vec(-2.0f64..2.0, 3)) {
        let xm = to_matrix(&x);
        let q = &q[..xm.cols()];
        let params = SmoParams { c, ..SmoParams::default() };
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = fit_svm_binary(&xm, &y, kernel_of(rbf, gamma), &params).unwrap();
        let b = fit_svm_binary(&xm, &neg, kernel_of(rbf, gamma), &params).unwrap();
        let fa = predict_svm_binary(&a, q).unwrap();
        let fb = predict_svm_binary(&b, q).unwrap();
        prop_assert!((fa + fb).abs() <= 1e-9);
    }
}

#[test]
fn six_point_problem_against_enumeration() {
    let x = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.2],
        vec![0.3, 1.1],
        vec![2.0, 2.0],
        vec![1.6, 2.4],
        vec![0.9, 1.0],
    ];
    let y = vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
    for (kernel, c) in [(Kernel::Linear, 1.0), (Kernel::Rbf { gamma: 0.7 }, 5.0)] {
        let k = kernel.gram(&to_matrix(&x));
        let sol = smo_solve(&k, &y, &SmoParams { c, ..SmoParams::default() }).unwrap();
        let krows: Vec<Vec<f64>> = (0..6).map(|i| k.row(i).to_vec()).collect();
        let (best, _) = brute_force_dual(&krows, &y, c);
        assert!((dual_objective(&sol.alphas, &y, &k) - best).abs() <= 1e-4);
    }
}

#[test]
fn xor_has_no_linear_separator() {
    // exhaustive check over a grid of hyperplanes: none classifies all four
    let pts = [([0.0, 0.0], 1.0), ([1.0, 1.0], 1.0), ([0.0, 1.0], -1.0), ([1.0, 0.0], -1.0)];
    let grid: Vec<f64> = (-20..=20).map(|i| f64::from(i) / 4.0).collect();
    for &w0 in &grid {
        for &w1 in &grid {
            for &b in &grid {
                let ok = pts.iter().filter(|(p, y)| (w0 * p[0] + w1 * p[1] + b) * y > 0.0).count();
                assert!(ok <= 3);
            }
        }
    }
}

#[test]
fn blobs_linear_ovo() {
    let (rows, labels) = blobs(11, 30, 3, 4, 8.0);
    let x = to_matrix(&rows);
    let m = fit_svm_multiclass(&x, &labels, 3, KernelSpec::Linear, &SmoParams::default()).unwrap();
    assert_eq!(m.pairwise.len(), 3);
    let correct = rows
        .iter()
        .zip(&labels)
        .filter(|(r, &l)| predict_svm_multiclass(&m, r).unwrap() == l)
        .count();
    assert!(correct as f64 / rows.len() as f64 >= 0.99);
    // each pairwise machine on its own restricted problem
    for (a, b, svm) in &m.pairwise {
        for (r, &l) in rows.iter().zip(&labels) {
            if l == *a || l == *b {
                let f = predict_svm_binary(svm, r).unwrap();
                assert_eq!(f >= 0.0, l == *a);
            }
        }
    }
}

#[test]
fn rbf_default_gamma_resolves_from_data() {
    let (rows, labels) = blobs(5, 10, 2, 2, 6.0);
    let x = to_matrix(&rows);
    let m = fit_svm_multiclass(&x, &labels, 2, KernelSpec::Rbf { gamma: None }, &SmoParams::default()).unwrap();
    let g = ftirchem::classifiers::default_gamma(&x);
    assert_eq!(m.pairwise[0].2.kernel, Kernel::Rbf { gamma: g });
}
