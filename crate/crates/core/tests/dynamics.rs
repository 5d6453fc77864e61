mod common;

use bnbar::dynamics::gas_contraction_margin;
use bnbar::{
    check_strict_stationarity, check_weak_stationarity, filter, simulate, BnbLaw, GasParams, IngarchParams,
    ModelSpec, ObservationLaw, SimulateOptions,
};
use common::*;

#[test]
fn stationarity_examples() {
    let strict = check_strict_stationarity(&recovery_truth());
    assert!(strict.holds && (strict.margin.unwrap() - 0.7).abs() < 1e-15);
    let weak = check_weak_stationarity(&recovery_truth());
    assert!(weak.holds && (weak.margin.unwrap() - 0.508_666_666_666_666_7).abs() < 1e-12);

    let close = ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::from_delta(10.0, 0.68, 0.2).unwrap()).unwrap();
    assert!((check_weak_stationarity(&close).margin.unwrap() - 0.793_066_666_666_666_7).abs() < 1e-12);

    let heavy = ModelSpec::bnb_ingarch(10.0, 2.0, IngarchParams::new(3.0, 0.5, 0.2).unwrap()).unwrap();
    let w = check_weak_stationarity(&heavy);
    assert!(!w.holds && w.reason.unwrap().contains("second conditional moment infinite"));

    let margin = gas_contraction_margin(10.0, 5.0, 0.1, 0.001);
    assert!((margin - 0.181_959_393_635_738).abs() < 1e-12);
}

#[test]
fn filters_forget_initialisation() {
    let gas = ModelSpec::bnb_gas(10.0, 5.0, GasParams::from_delta(10.0, 0.4, 0.005).unwrap()).unwrap();
    assert!(check_strict_stationarity(&gas).holds);
    for spec in [recovery_truth(), gas] {
        let path = simulate(&spec, 400, 100, 8, SimulateOptions::default()).unwrap();
        let a = filter(&spec, &path.y, 1.0).unwrap().lambda_hat;
        let b = filter(&spec, &path.y, 100.0).unwrap().lambda_hat;
        let gaps: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
        assert!(gaps[199] < 1e-8);
        assert!(log_linear_slope(&gaps, 1e-13).unwrap() < 0.0);
    }
}

#[test]
fn gas_updates_contract() {
    let law = ObservationLaw::Bnb(BnbLaw::new(10.0, 5.0).unwrap());
    let p = GasParams::new(0.9 * 10f64.ln(), 0.1, 0.001).unwrap();
    let (mut a, mut b) = (5.0, 500.0);
    let mut prev = f64::INFINITY;
    for y in [3u64, 12, 0, 40, 9, 9, 9, 1] {
        a = p.update(y, a, &law).lambda;
        b = p.update(y, b, &law).lambda;
        let gap = (a.ln() - b.ln()).abs();
        assert!(gap < 0.2 * prev);
        prev = gap;
    }
}

#[test]
fn gas_log_mean_stays_in_compact_set() {
    let spec = ModelSpec::bnb_gas(4.0, 3.0, GasParams::new(0.5, 0.7, 0.3).unwrap()).unwrap();
    let (r, alpha) = (4.0, 3.0);
    let (omega, phi, tau) = (0.5, 0.7, 0.3);
    let lower = (omega - tau * (alpha + r + 1.0)) / (1.0 - phi);
    let upper = (omega + tau * (alpha + 1.0)) / (1.0 - phi);
    let path = simulate(&spec, 20_000, 500, 5, SimulateOptions::default()).unwrap();
    for &l in &path.lambda {
        assert!(l.ln() >= lower - 1e-9 && l.ln() <= upper + 1e-9);
    }
}
