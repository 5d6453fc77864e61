mod common;

use bnbar::{inject_outliers, simulate, Error, GasParams, IngarchParams, ModelSpec, SimulateOptions};
use bnbar::estimation::filter;
use common::*;

fn mean(v: &[u64]) -> f64 {
    v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64
}

/// Standard error of the mean from non-overlapping batch means.
fn batch_se(v: &[u64], batches: usize) -> f64 {
    let size = v.len() / batches;
    let means: Vec<f64> = v.chunks_exact(size).map(mean).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (var / means.len() as f64).sqrt()
}

fn acf(v: &[u64], lag: usize) -> f64 {
    let m = mean(v);
    let d: Vec<f64> = v.iter().map(|&x| x as f64 - m).collect();
    let c0: f64 = d.iter().map(|x| x * x).sum();
    let ck: f64 = d.iter().zip(&d[lag..]).map(|(a, b)| a * b).sum();
    ck / c0
}

#[test]
fn ergodic_mean_and_autocorrelation() {
    let path = simulate(&recovery_truth(), 100_000, 500, 17, SimulateOptions::default()).unwrap();
    let m = mean(&path.y);
    assert!((m - 10.0).abs() < 0.2, "mean {m}");
    assert!((m - 10.0).abs() < 3.0 * batch_se(&path.y, 50), "mean {m}");
    let rho: Vec<f64> = (1..=4).map(|k| acf(&path.y, k)).collect();
    assert!(rho[0] > 0.0);
    for w in rho.windows(2) {
        let rate = w[1] / w[0];
        assert!((rate - 0.7).abs() < 0.07, "decay rate {rate}, acf {rho:?}");
    }
}

#[test]
fn burn_in_does_not_move_marginal_moments() {
    let a = simulate(&recovery_truth(), 50_000, 500, 1, SimulateOptions::default()).unwrap();
    let b = simulate(&recovery_truth(), 50_000, 2000, 2, SimulateOptions::default()).unwrap();
    let se = (batch_se(&a.y, 50).powi(2) + batch_se(&b.y, 50).powi(2)).sqrt();
    assert!((mean(&a.y) - mean(&b.y)).abs() < 4.0 * se);
}

/// Median of block maxima for blocks of length `n`.
fn median_block_max(v: &[u64], n: usize) -> f64 {
    let mut m: Vec<u64> = v.chunks_exact(n).map(|c| *c.iter().max().unwrap()).collect();
    m.sort_unstable();
    m[m.len() / 2] as f64
}

#[test]
fn heavy_tail_maxima_keep_growing() {
    // block maxima scale like n^(1/alpha)
    let growth = |alpha: f64| {
        let spec = ModelSpec::bnb_ingarch(5.0, alpha, IngarchParams::from_delta(5.0, 0.3, 0.2).unwrap()).unwrap();
        let path = simulate(&spec, 160_000, 500, 23, SimulateOptions::default()).unwrap();
        let m = [1000, 4000, 16_000].map(|n| median_block_max(&path.y, n));
        (m[1] / m[0], m[2] / m[1])
    };
    let heavy = growth(1.5);
    let light = growth(5.0);
    assert!(heavy.0 > 2.0 && heavy.1 > 2.0, "{heavy:?}");
    assert!(light.0 < 2.0 && light.1 < 2.0, "{light:?}");
}

#[test]
fn nonstationary_ingarch_refused_unless_overridden() {
    let bad = ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::new(1.0, 0.9, 0.2).unwrap()).unwrap();
    match simulate(&bad, 100, 10, 0, SimulateOptions::default()) {
        Err(Error::NonStationary(msg)) => assert!(msg.contains("tau + phi < 1")),
        other => panic!("expected refusal, got {other:?}"),
    }
    let path = simulate(&bad, 50, 0, 0, SimulateOptions { allow_nonstationary: true }).unwrap();
    assert!(!path.warnings.is_empty());
}

#[test]
fn outlier_injection() {
    let spec = recovery_truth();
    let path = simulate(&spec, 100, 100, 3, SimulateOptions::default()).unwrap();
    assert_eq!(inject_outliers(&path, &[], &[]).unwrap(), path);
    let hit = inject_outliers(&path, &[10, 90], &[500, 600]).unwrap();
    assert_eq!((hit.y[10], hit.y[90]), (500, 600));
    assert_eq!(hit.lambda, path.lambda);
    assert_eq!(hit.injections.len(), 2);
    assert_eq!(hit.injections[0].original, path.y[10]);
    assert!(inject_outliers(&path, &[100], &[1]).is_err());
    assert!(inject_outliers(&path, &[1, 2], &[1]).is_err());
}

#[test]
fn score_driven_filter_reacts_less_to_an_outlier() {
    let ingarch = recovery_truth();
    let gas = ModelSpec::bnb_gas(10.0, 5.0, GasParams::from_delta(10.0, 0.5, 0.2).unwrap()).unwrap();
    let clean = simulate(&ingarch, 200, 200, 6, SimulateOptions::default()).unwrap();
    let value = (20.0 * clean.sample_mean()).round() as u64;
    let dirty = inject_outliers(&clean, &[50], &[value]).unwrap();
    let deviation = |spec: &ModelSpec| {
        let a = filter(spec, &clean.y, 10.0).unwrap().lambda_hat;
        let b = filter(spec, &dirty.y, 10.0).unwrap().lambda_hat;
        (51..=60).map(|t| (b[t] - a[t]).abs() / a[t]).fold(0.0, f64::max)
    };
    let (g, i) = (deviation(&gas), deviation(&ingarch));
    assert!(g < i, "GAS {g} vs INGARCH {i}");
}
