use fracfbm_core::fbm::{covariance_validator, fbm_covariance, split_seed, FbmGenerator};
use fracfbm_core::norms::slice_lambda_alpha;

fn mean_se(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn covariance_law_across_hurst() {
    for (h, seed) in [(0.6, 1), (0.75, 2), (0.9, 3)] {
        let r = covariance_validator(h, 256, 10_000, seed).unwrap();
        assert!(r.passed, "H = {h}: max |z| = {}", r.max_abs_z);
        let origin = r.entries.iter().find(|e| e.gamma == 0.0 && e.eta == 0.0).unwrap();
        assert_eq!(origin.empirical, 0.0);
    }
}

#[test]
fn brownian_case_has_uncorrelated_disjoint_increments() {
    let g = FbmGenerator::new(0.5, 64).unwrap();
    let data: Vec<f64> = (0..10_000)
        .map(|k| {
            let p = g.sample_values(split_seed(5, k));
            (p[16] - p[0]) * (p[64] - p[40])
        })
        .collect();
    let (mean, se) = mean_se(&data);
    assert!(mean.abs() <= 3.0 * se, "{mean} vs se {se}");
    let r = covariance_validator(0.5, 64, 10_000, 6).unwrap();
    for e in r.entries.iter().filter(|e| e.kind == "covariance") {
        assert!((e.expected - e.gamma.min(e.eta)).abs() < 1e-15);
    }
    assert!(r.passed);
}

#[test]
fn increment_variance_is_stationary_and_self_similar() {
    let hurst = 0.75;
    let n = 128;
    let g = FbmGenerator::new(hurst, n).unwrap();
    let paths: Vec<Vec<f64>> = (0..10_000).map(|k| g.sample_values(split_seed(9, k))).collect();
    let lag = 8;
    let delta = lag as f64 / n as f64;
    let expected = delta.powf(2.0 * hurst);
    for start in [0, 30, 60, 120 - lag] {
        let data: Vec<f64> = paths.iter().map(|p| (p[start + lag] - p[start]).powi(2)).collect();
        let (mean, se) = mean_se(&data);
        assert!((mean - expected).abs() <= 3.0 * se, "start {start}: {mean} vs {expected}");
    }
    // coarse grid of 64 cells vs every other node of the fine grid, rescaled
    let coarse = FbmGenerator::new(hurst, n / 2).unwrap();
    let c: Vec<f64> = (0..10_000)
        .map(|k| {
            let p = coarse.sample_values(split_seed(10, k));
            (p[4] - p[0]).powi(2)
        })
        .collect();
    let f: Vec<f64> = paths.iter().map(|p| (p[8] - p[0]).powi(2)).collect();
    let (mc, sc) = mean_se(&c);
    let (mf, sf) = mean_se(&f);
    assert!((mc - mf).abs() <= 3.0 * (sc * sc + sf * sf).sqrt());
}

#[test]
fn cholesky_fallback_has_the_same_law() {
    let g = FbmGenerator::with_cholesky(0.7, 32).unwrap();
    assert!(!g.uses_circulant());
    let data: Vec<f64> = (0..10_000)
        .map(|k| {
            let p = g.sample_values(split_seed(11, k));
            p[10] * p[25]
        })
        .collect();
    let (mean, se) = mean_se(&data);
    let expected = fbm_covariance(10.0 / 32.0, 25.0 / 32.0, 0.7);
    assert!((mean - expected).abs() <= 4.0 * se);
}

#[test]
fn realized_lambda_is_finite() {
    let g = FbmGenerator::new(0.75, 256).unwrap();
    for k in 0..100 {
        let p = g.sample_values(split_seed(12, k));
        let l = slice_lambda_alpha(&p, 1.0 / 256.0, 0.3);
        assert!(l.is_finite() && l > 0.0);
    }
}
