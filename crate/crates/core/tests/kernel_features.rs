mod common;

use common::*;
use proptest::prelude::*;
use radbound::kernel::{gaussian_gram, gaussian_lambda_bound, kernel_cov_summary, linear_gram, min_pairwise_distance};
use radbound::linalg::covariance;
use radbound::Matrix;

#[test]
fn gram_entries_match_direct_evaluation() {
    let mut r = rng(21);
    let x = gaussian_matrix(&mut r, 4, 3);
    let sigma = 1.7;
    let g = gaussian_gram(&x, sigma).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let d2: f64 = (0..3).map(|k| (x.get(i, k) - x.get(j, k)).powi(2)).sum();
            let want = (-d2 / (sigma * sigma)).exp();
            assert!((g.entries().get(i, j) - want).abs() < 1e-15);
        }
        assert_eq!(g.entries().get(i, i), 1.0);
    }
}

#[test]
fn points_at_distance_sigma() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [0.6, 0.8]]).unwrap();
    let g = gaussian_gram(&x, 1.0).unwrap();
    assert!((g.entries().get(0, 1) - (-1f64).exp()).abs() < 1e-15);
    assert!(gaussian_gram(&x, 0.0).is_err());
}

#[test]
fn linear_kernel_spectrum_matches_feature_covariance() {
    // degree-1 polynomial kernel: features are the points themselves
    let mut r = rng(22);
    let x = gaussian_matrix(&mut r, 7, 3);
    let k = kernel_cov_summary(&linear_gram(&x).unwrap()).unwrap();
    let c = covariance(&x).unwrap();
    assert!(close(k.trace, c.trace, 1e-12));
    for j in 0..3 {
        assert!((k.spectrum[j] - c.spectrum[j]).abs() < 1e-12);
    }
    assert!(k.spectrum[3..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn min_distance_matches_exhaustive_scan() {
    let mut r = rng(23);
    let x = gaussian_matrix(&mut r, 20, 4);
    let mut best = f64::INFINITY;
    for i in 0..20 {
        for j in 0..20 {
            if i != j {
                let d: Vec<f64> = (0..4).map(|k| x.get(i, k) - x.get(j, k)).collect();
                best = best.min(norm(&d));
            }
        }
    }
    assert_eq!(min_pairwise_distance(&x).unwrap(), best);
}

#[test]
fn lambda_bound_on_grid_with_spacing_two() {
    // 100 points on a 10×10 grid with spacing 2 realize Δ = 2
    let rows: Vec<[f64; 2]> = (0..100).map(|k| [2.0 * (k / 10) as f64, 2.0 * (k % 10) as f64]).collect();
    let x = Matrix::from_rows(&rows).unwrap();
    let delta = min_pairwise_distance(&x).unwrap();
    assert_eq!(delta, 2.0);
    let bound = gaussian_lambda_bound(100, delta, 1.0);
    assert!((bound - (0.01 + (-4f64).exp())).abs() < 1e-15);
    let s = kernel_cov_summary(&gaussian_gram(&x, 1.0).unwrap()).unwrap();
    assert!(s.lambda_max <= bound + 1e-10);
    assert!(close(s.trace, 1.0, 1e-15));
}

fn points(max_n: usize, max_d: usize) -> impl Strategy<Value = Matrix> {
    (2..=max_n, 1..=max_d).prop_flat_map(|(n, d)| {
        prop::collection::vec(-3.0f64..3.0, n * d).prop_map(move |v| Matrix::new(n, d, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lambda_bound_always_holds(x in points(25, 4), sigma in 0.1f64..10.0) {
        let s = kernel_cov_summary(&gaussian_gram(&x, sigma).unwrap()).unwrap();
        let b = gaussian_lambda_bound(x.rows(), min_pairwise_distance(&x).unwrap(), sigma);
        prop_assert!(s.lambda_max <= b + 1e-10);
    }

    #[test]
    fn gram_is_psd(x in points(30, 3), sigma in 0.1f64..10.0) {
        let g = gaussian_gram(&x, sigma).unwrap();
        let vals = radbound::linalg::sym_eigenvalues(g.entries()).unwrap();
        prop_assert!(vals.iter().all(|v| *v >= -1e-10 * x.rows() as f64));
    }

    #[test]
    fn ratio_shrinks_with_width(x in points(20, 3), s1 in 0.1f64..5.0, f in 1.05f64..4.0) {
        prop_assume!(min_pairwise_distance(&x).unwrap() > 1e-6);
        let narrow = kernel_cov_summary(&gaussian_gram(&x, s1).unwrap()).unwrap();
        let wide = kernel_cov_summary(&gaussian_gram(&x, s1 * f).unwrap()).unwrap();
        prop_assert!(narrow.ratio() <= wide.ratio() + 1e-12);
    }
}
