#![allow(dead_code)]

use bnbar::special::ln_beta;
use bnbar::{BnbParams, GasParams, IngarchParams, ModelSpec};

/// Support points summed before giving up on heavy tails.
pub const SUM_CAP: u64 = 10_000_000;

pub fn recovery_truth() -> ModelSpec {
    ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::from_delta(10.0, 0.5, 0.2).unwrap()).unwrap()
}

/// BNB-GAS with the empirical estimates; ln-level 2.087.
pub fn gas_empirical() -> ModelSpec {
    ModelSpec::bnb_gas(4.408, 5.029, GasParams::new(2.087 * (1.0 - 0.714), 0.714, 0.197).unwrap()).unwrap()
}

pub fn grid27() -> Vec<BnbParams> {
    let mut out = Vec::new();
    for lambda in [1.0, 10.0, 50.0] {
        for r in [0.5, 5.0, 50.0] {
            for alpha in [2.5, 5.0, 20.0] {
                out.push(BnbParams::new(lambda, r, alpha).unwrap());
            }
        }
    }
    out
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Sums {
    pub mass: f64,
    pub mean: f64,
    pub second: f64,
    pub score_mean: f64,
    pub support: u64,
}

/// Σ p, Σ y p, Σ y² p and Σ s p over the support, stopped once the mass
/// deficit is below 1e-15 or at [`SUM_CAP`].
pub fn sums(p: &BnbParams) -> Sums {
    let law = p.law();
    let mut mass = Neumaier::default();
    let mut mean = Neumaier::default();
    let mut second = Neumaier::default();
    let mut score = Neumaier::default();
    let mut support = 0;
    for (y, q) in p.pmf_iter() {
        let yf = y as f64;
        mass.add(q);
        mean.add(yf * q);
        second.add(yf * yf * q);
        score.add(law.score_log_lambda(y, p.lambda()) * q);
        support = y;
        if (1.0 - mass.value() < 1e-15 && yf > p.lambda()) || y >= SUM_CAP {
            break;
        }
    }
    Sums {
        mass: mass.value(),
        mean: mean.value(),
        second: second.value(),
        score_mean: score.value(),
        support,
    }
}

/// E Y² from the beta mixture: with Q = (1 − P)/P, E[Y² | P] = r Q / P + r² Q²,
/// and E[P^{-k} (1 − P)^m] = B(α − k, β + m) / B(α, β).
pub fn second_moment_by_mixture(p: &BnbParams) -> f64 {
    let (r, a, b) = (p.r(), p.alpha(), p.beta());
    let base = ln_beta(a, b);
    let ratio = |k: f64, m: f64| (ln_beta(a - k, b + m) - base).exp();
    r * ratio(2.0, 1.0) + r * r * ratio(2.0, 2.0)
}

pub fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Rates of geometric decay: slope of ln |gap| on t over the entries above `floor`.
pub fn log_linear_slope(gaps: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > floor)
        .map(|(t, &g)| (t as f64, g.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let sxy: f64 = pts.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}
