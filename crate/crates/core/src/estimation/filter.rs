use serde::{Deserialize, Serialize};

use crate::dynamics::ModelSpec;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_gamma_ratio};

/// Filtered conditional means and per-step log-likelihood contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutput {
    /// λ̂_t used to score y_t; `lambda_hat[0]` is the initialisation.
    pub lambda_hat: Vec<f64>,
    pub loglik_terms: Vec<f64>,
    pub total_loglik: f64,
    pub clamp_hits: usize,
}

/// A count series with the parameter-free parts of the likelihood cached.
///
/// `ln Γ(y + r) − ln Γ(r) − ln Γ(y + 1)` depends on κ only through r, so it
/// is evaluated once per distinct count per likelihood call.
#[derive(Debug, Clone)]
pub(crate) struct PreparedSeries {
    y: Vec<u64>,
    slot: Vec<usize>,
    distinct: Vec<u64>,
    ln_factorial: Vec<f64>,
}

impl PreparedSeries {
    pub(crate) fn new(y: &[u64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidInput("series is empty".into()));
        }
        let mut distinct = y.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let slot = y
            .iter()
            .map(|v| distinct.binary_search(v).expect("value present"))
            .collect();
        let ln_factorial = distinct.iter().map(|&v| ln_gamma(v as f64 + 1.0)).collect();
        Ok(Self {
            y: y.to_vec(),
            slot,
            distinct,
            ln_factorial,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.y.len()
    }

    fn coefficients(&self, r: f64) -> Vec<f64> {
        self.distinct
            .iter()
            .zip(&self.ln_factorial)
            .map(|(&v, &lf)| ln_gamma_ratio(r, v as f64) - lf)
            .collect()
    }

    /// Runs the recursion; `record` receives `(t, λ̂_t, l̂_t)`.
    fn run(
        &self,
        spec: &ModelSpec,
        lambda_init: f64,
        mut record: impl FnMut(usize, f64, f64),
    ) -> Result<(f64, usize)> {
        if !(lambda_init > 0.0 && lambda_init.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "filter initialisation must be positive, got {lambda_init}"
            )));
        }
        let law = spec.law();
        let coefficients = self.coefficients(spec.r());
        let mut lambda = lambda_init;
        let mut total = 0.0;
        let mut clamp_hits = 0;
        for (t, (&y, &slot)) in self.y.iter().zip(&self.slot).enumerate() {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::FilterFailure { t });
            }
            let term = law.ln_pmf_with_coefficient(y, lambda, coefficients[slot]);
            if !term.is_finite() {
                return Err(Error::FilterFailure { t });
            }
            record(t, lambda, term);
            total += term;
            let step = spec.step(&law, y, lambda);
            clamp_hits += step.clamped as usize;
            lambda = step.lambda;
        }
        Ok((total, clamp_hits))
    }

    /// Total log-likelihood and clamp count without storing the path.
    pub(crate) fn log_likelihood(&self, spec: &ModelSpec, lambda_init: f64) -> Result<(f64, usize)> {
        self.run(spec, lambda_init, |_, _, _| {})
    }

    pub(crate) fn filter(&self, spec: &ModelSpec, lambda_init: f64) -> Result<FilterOutput> {
        let n = self.len();
        let mut lambda_hat = Vec::with_capacity(n);
        let mut loglik_terms = Vec::with_capacity(n);
        let (total_loglik, clamp_hits) = self.run(spec, lambda_init, |_, l, term| {
            lambda_hat.push(l);
            loglik_terms.push(term);
        })?;
        Ok(FilterOutput {
            lambda_hat,
            loglik_terms,
            total_loglik,
            clamp_hits,
        })
    }
}

/// Filters `y` through the recursion of `spec`, starting at `lambda_init`.
pub fn filter(spec: &ModelSpec, y: &[u64], lambda_init: f64) -> Result<FilterOutput> {
    PreparedSeries::new(y)?.filter(spec, lambda_init)
}
