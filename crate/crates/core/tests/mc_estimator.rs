mod common;

use common::*;
use radbound::kernel::GramMatrix;
use radbound::mc::{estimate_complexity, estimate_oracle, sample_oracle, sample_sup_distribution};
use radbound::oracles::{exact_expectation, Budget, ClassSpec, FiniteClass};
use radbound::rng::{sample_normals, sample_signs};
use radbound::{Matrix, MultitaskDataset, Variant};

#[test]
fn identity_gram_is_deterministic() {
    let n = 16;
    let spec = ClassSpec::Mkl {
        grams: vec![GramMatrix::new(Matrix::identity(n)).unwrap()],
    };
    let data = MultitaskDataset::single(Matrix::identity(n)).unwrap();
    let e = estimate_complexity(&spec, &data, 200, 3, Variant::Rademacher).unwrap();
    assert!(close(e.estimate.mean, 2.0 / (n as f64).sqrt(), 1e-14));
    assert!(e.estimate.stderr < 1e-15);
    assert_eq!(e.estimate.normalizer, 2.0 / n as f64);
    assert!(e.upper.is_none());
}

#[test]
fn estimates_are_reproducible() {
    let mut r = rng(51);
    let data = multitask(&mut r, 3, 4, 3);
    let spec = ClassSpec::Subspace { k: 2 };
    let a = estimate_complexity(&spec, &data, 300, 9, Variant::Gaussian).unwrap();
    let b = estimate_complexity(&spec, &data, 300, 9, Variant::Gaussian).unwrap();
    assert_eq!(a, b);
    let c = estimate_complexity(&spec, &data, 300, 10, Variant::Gaussian).unwrap();
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_results() {
    let mut r = rng(52);
    let data = multitask(&mut r, 4, 3, 3);
    let spec = ClassSpec::DictSparsity { k: 2 };
    let oracle = spec.oracle(&data, Budget::default()).unwrap();
    let parallel = sample_oracle(&oracle, 500, 4, Variant::Rademacher);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sample_oracle(&oracle, 500, 4, Variant::Rademacher));
    assert_eq!(parallel, single);
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    let mut r = rng(53);
    let data = multitask(&mut r, 2, 4, 3);
    let spec = ClassSpec::DictSharing { k: 2 };
    let oracle = spec.oracle(&data, Budget::default()).unwrap();
    let exact = exact_expectation(&oracle, 22).unwrap().value * 2.0 / 8.0;
    let est = estimate_complexity(&spec, &data, 100_000, 1, Variant::Rademacher).unwrap().estimate;
    assert!((est.mean - exact).abs() <= 3.0 * est.stderr);
    let samples = sample_sup_distribution(&spec, &data, 100_000, 1, Variant::Rademacher).unwrap();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    assert!((mean * 2.0 / 8.0 - est.mean).abs() < 1e-12);
}

#[test]
fn single_point_samples_are_fair_coins() {
    let class = FiniteClass::new(vec![vec![1.0, 0.0, 0.0]]).unwrap();
    let s = sample_oracle(&class, 100_000, 7, Variant::Rademacher);
    assert!(s.iter().all(|v| v.value == 1.0 || v.value == -1.0));
    let freq = s.iter().filter(|v| v.value == 1.0).count() as f64 / 1e5;
    assert!((freq - 0.5).abs() < 0.01);
}

#[test]
fn constant_oracle_gives_constant_samples() {
    let constant = (5usize, |_: &[f64]| 2.5);
    let s = sample_oracle(&constant, 50, 1, Variant::Gaussian);
    assert!(s.iter().all(|v| v.value == 2.5));
    let e = estimate_oracle(&constant, 1.0, 50, 1, Variant::Gaussian).unwrap();
    assert_eq!(e.estimate.stderr, 0.0);
}

#[test]
fn sign_and_normal_moments() {
    let n = 1_000_000;
    let s = sample_signs(n, 5);
    let mean = s.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 4.0 / (n as f64).sqrt());
    let g = sample_normals(n, 5);
    let gm = g.iter().sum::<f64>() / n as f64;
    let var = g.iter().map(|v| (v - gm) * (v - gm)).sum::<f64>() / (n - 1) as f64;
    assert!((var - 1.0).abs() < 0.01);
}

#[test]
fn gaussian_and_rademacher_estimates_match_exact_values() {
    // symmetric set A = {±e_i}: E sup = E max|ε_i| = 1 for signs and
    // E max|g_i| for normals, integrated numerically in one dimension
    let n = 6;
    let mut pts = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        pts.push(e.clone());
        e[i] = -1.0;
        pts.push(e);
    }
    let class = FiniteClass::new(pts).unwrap();
    let rad = estimate_oracle(&class, 1.0, 20_000, 3, Variant::Rademacher).unwrap().estimate;
    assert_eq!(rad.mean, 1.0);
    let gau = estimate_oracle(&class, 1.0, 200_000, 3, Variant::Gaussian).unwrap().estimate;
    // E max_i |g_i| = ∫ P(max > t) dt = ∫_0^∞ 1 − (2Φ(t) − 1)^n dt
    let steps = 200_000;
    let h = 10.0 / steps as f64;
    let mut exact = 0.0;
    for k in 0..steps {
        let t = (k as f64 + 0.5) * h;
        let p = erf(t / std::f64::consts::SQRT_2);
        exact += (1.0 - p.powi(n as i32)) * h;
    }
    assert!((gau.mean - exact).abs() <= 4.0 * gau.stderr, "{} vs {exact}", gau.mean);
}

/// Taylor series below 3, continued fraction for erfc above.
fn erf(x: f64) -> f64 {
    if x < 3.0 {
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -x * x / k;
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add.abs() < 1e-17 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // erfc continued fraction
        let mut f = 0.0;
        for k in (1..60).rev() {
            f = k as f64 / 2.0 / (x + f);
        }
        1.0 - (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
    }
}
