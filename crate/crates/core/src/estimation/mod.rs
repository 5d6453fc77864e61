//! Maximum likelihood estimation of the four model families.
//!
//! The average log-likelihood is maximised over an unconstrained
//! reparameterisation with a restarted Nelder–Mead simplex. Standard errors
//! come from a central-difference Hessian of the average log-likelihood taken
//! directly in natural coordinates `(r, α, ω, φ, τ)`.

mod filter;
mod hessian;
mod simplex;
mod transform;

pub use filter::{filter, FilterOutput};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynFamily, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::simulation::stream;
use filter::PreparedSeries;
use simplex::{minimize, SimplexOptions};

/// Shortest series accepted by [`fit`].
pub const MIN_SERIES_LEN: usize = 20;

/// Jittered restarts draw from this fixed stream.
const JITTER_SEED: u64 = 0x6a09_e667_f3bc_c908;

/// Multipliers of the moment-matched r used as extra starts for BNB families.
const DISPERSION_STARTS: [f64; 2] = [4.0, 16.0];

/// Upper bound on successive re-starts of the simplex from its own optimum.
const MAX_POLISH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Jittered restarts after the heuristic start.
    pub restarts: usize,
    /// Objective improvement (average log-likelihood) below which a run stops.
    pub tolerance: f64,
    /// Evaluation budget for each simplex run.
    pub max_evals: usize,
    /// Half-width of the uniform jitter applied in unconstrained coordinates.
    pub jitter: f64,
    /// λ̂_1; the sample mean when absent.
    pub lambda_init: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 3,
            tolerance: 1e-9,
            max_evals: 20_000,
            jitter: 0.5,
            lambda_init: None,
        }
    }
}

/// Fitted parameters keyed by name, in κ order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NamedParams<T> {
    pub r: T,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<T>,
    pub omega: T,
    pub phi: T,
    pub tau: T,
}

impl<T: Copy> NamedParams<T> {
    pub fn from_slice(family: Family, values: &[T]) -> Self {
        let (alpha, theta) = if family.has_alpha() {
            (Some(values[1]), &values[2..])
        } else {
            (None, &values[1..])
        };
        Self {
            r: values[0],
            alpha,
            omega: theta[0],
            phi: theta[1],
            tau: theta[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedSe {
    pub delta: Option<f64>,
    pub inv_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inv_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub n_restarts: usize,
    pub n_evals: usize,
    pub clamp_hits: usize,
    pub lambda_init: f64,
    pub warnings: Vec<String>,
    /// F̂_T, the negative Hessian of the average log-likelihood.
    pub fisher: Vec<Vec<f64>>,
}

/// The JSON document written for a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub n_obs: usize,
    pub kappa_hat: NamedParams<f64>,
    pub se: NamedParams<Option<f64>>,
    pub loglik: f64,
    pub aic: f64,
    pub delta: f64,
    pub inv_r: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inv_alpha: Option<f64>,
    pub se_derived: DerivedSe,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: Family,
    pub n_obs: usize,
    /// κ̂ in natural coordinates, `(r, α, ω, φ, τ)` order.
    pub kappa_hat: Vec<f64>,
    /// sqrt((F̂_T⁻¹)_ii / T); absent when the Hessian is singular or not
    /// negative definite in that direction.
    pub se: Vec<Option<f64>>,
    pub loglik: f64,
    pub aic: f64,
    pub delta_hat: f64,
    pub inv_r: f64,
    pub inv_alpha: Option<f64>,
    pub se_delta: Option<f64>,
    pub se_inv_r: Option<f64>,
    pub se_inv_alpha: Option<f64>,
    pub converged: bool,
    pub n_restarts: usize,
    pub n_evals: usize,
    pub clamp_hits: usize,
    pub lambda_init: f64,
    pub fisher: DMatrix<f64>,
    pub warnings: Vec<String>,
}

/// AIC = 2k − 2 loglik.
pub fn aic(loglik: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

impl FitResult {
    pub fn n_params(&self) -> usize {
        self.kappa_hat.len()
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::from_kappa(self.family, &self.kappa_hat)
    }

    /// Filtered means at κ̂ for the series the model was fitted on.
    pub fn filtered(&self, y: &[u64]) -> Result<FilterOutput> {
        filter(&self.spec()?, y, self.lambda_init)
    }

    /// Value of a reported quantity: delta, phi, tau, inv_r, inv_alpha or any κ name.
    pub fn reported(&self, name: &str) -> Option<f64> {
        match name {
            "delta" => Some(self.delta_hat),
            "inv_r" => Some(self.inv_r),
            "inv_alpha" => self.inv_alpha,
            _ => self.kappa_index(name).map(|i| self.kappa_hat[i]),
        }
    }

    /// Standard error of a reported quantity.
    pub fn reported_se(&self, name: &str) -> Option<f64> {
        match name {
            "delta" => self.se_delta,
            "inv_r" => self.se_inv_r,
            "inv_alpha" => self.se_inv_alpha,
            _ => self.kappa_index(name).and_then(|i| self.se[i]),
        }
    }

    fn kappa_index(&self, name: &str) -> Option<usize> {
        self.family.param_names().iter().position(|&n| n == name)
    }

    pub fn report(&self) -> FitReport {
        let fisher = (0..self.fisher.nrows())
            .map(|i| self.fisher.row(i).iter().copied().collect())
            .collect();
        FitReport {
            family: self.family,
            n_obs: self.n_obs,
            kappa_hat: NamedParams::from_slice(self.family, &self.kappa_hat),
            se: NamedParams::from_slice(self.family, &self.se),
            loglik: self.loglik,
            aic: self.aic,
            delta: self.delta_hat,
            inv_r: self.inv_r,
            inv_alpha: self.inv_alpha,
            se_derived: DerivedSe {
                delta: self.se_delta,
                inv_r: self.se_inv_r,
                inv_alpha: self.se_inv_alpha,
            },
            diagnostics: FitDiagnostics {
                converged: self.converged,
                n_restarts: self.n_restarts,
                n_evals: self.n_evals,
                clamp_hits: self.clamp_hits,
                lambda_init: self.lambda_init,
                warnings: self.warnings.clone(),
                fisher,
            },
        }
    }
}

impl Serialize for FitResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.report().serialize(s)
    }
}

fn mean_and_variance(y: &[u64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = y.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Deterministic start: δ₀ = sample mean, φ₀ = 0.5, τ₀ = 0.2, r₀ from the
/// negative binomial moment match, α₀ = 5.
pub fn start_values(family: Family, y: &[u64]) -> Vec<f64> {
    let (mean, var) = mean_and_variance(y);
    let delta = mean.max(0.1);
    let r = if var > mean * 1.0001 {
        (mean * mean / (var - mean)).clamp(0.1, 1e3)
    } else {
        100.0
    };
    let (phi, tau) = (0.5, 0.2);
    let omega = match family.dynamics {
        DynFamily::Ingarch => delta * (1.0 - phi - tau),
        DynFamily::Gas => (1.0 - phi) * delta.ln(),
    };
    let mut kappa = vec![r];
    if family.has_alpha() {
        kappa.push(5.0);
    }
    kappa.extend([omega, phi, tau]);
    kappa
}

struct Objective<'a> {
    family: Family,
    series: &'a PreparedSeries,
    lambda_init: f64,
}

impl Objective<'_> {
    /// Average log-likelihood at natural κ without domain checks on θ.
    fn average_loglik(&self, kappa: &[f64]) -> f64 {
        if kappa[0] <= 0.0 || (self.family.has_alpha() && kappa[1] <= 1.0) {
            return f64::NAN;
        }
        let spec = match ModelSpec::from_kappa_unchecked(self.family, kappa) {
            Ok(s) => s,
            Err(_) => return f64::NAN,
        };
        match self.series.log_likelihood(&spec, self.lambda_init) {
            Ok((total, _)) => total / self.series.len() as f64,
            Err(_) => f64::NAN,
        }
    }

    /// Negative average log-likelihood at unconstrained `u`; +∞ outside the domain.
    fn cost(&self, u: &[f64]) -> f64 {
        let kappa = transform::to_natural(self.family, u);
        if ModelSpec::from_kappa(self.family, &kappa).is_err() {
            return f64::INFINITY;
        }
        let v = -self.average_loglik(&kappa);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

struct Run {
    u: Vec<f64>,
    cost: f64,
    evals: usize,
    converged: bool,
}

/// One start: simplex runs restarted from their own optimum until a restart
/// improves the objective by less than the tolerance.
fn run_from(objective: &Objective, u0: Vec<f64>, options: &FitOptions) -> Run {
    let simplex = SimplexOptions {
        f_tol: options.tolerance,
        max_evals: options.max_evals,
        ..SimplexOptions::default()
    };
    let mut evals = 0;
    let mut best = minimize(|u| objective.cost(u), &u0, &simplex);
    evals += best.evals;
    let mut converged = best.converged;
    for _ in 0..MAX_POLISH {
        let next = minimize(|u| objective.cost(u), &best.x, &simplex);
        evals += next.evals;
        let gain = best.f - next.f;
        if next.f <= best.f {
            converged = next.converged;
            best = next;
        }
        if !(gain >= options.tolerance) {
            break;
        }
    }
    let converged = converged && best.f.is_finite();
    Run {
        u: best.x,
        cost: best.f,
        evals,
        converged,
    }
}

fn check_series(y: &[u64]) -> Result<()> {
    if y.len() < MIN_SERIES_LEN {
        return Err(Error::InvalidInput(format!(
            "series has {} observations; at least {MIN_SERIES_LEN} are required",
            y.len()
        )));
    }
    Ok(())
}

fn default_lambda_init(y: &[u64], options: &FitOptions) -> f64 {
    options
        .lambda_init
        .unwrap_or_else(|| mean_and_variance(y).0)
        .max(1e-3)
}

/// Maximum likelihood fit of `family` to `y`.
pub fn fit(family: Family, y: &[u64], options: &FitOptions) -> Result<FitResult> {
    check_series(y)?;
    let series = PreparedSeries::new(y)?;
    let objective = Objective {
        family,
        series: &series,
        lambda_init: default_lambda_init(y, options),
    };
    let kappa0 = start_values(family, y);
    let u0 = transform::to_unconstrained(family, &kappa0);
    let mut jitter = stream(JITTER_SEED);
    let mut starts = vec![u0.clone()];
    if family.has_alpha() {
        // the moment-matched r absorbs tail mass; also start from lighter dispersion
        for scale in DISPERSION_STARTS {
            let mut k = kappa0.clone();
            k[0] *= scale;
            starts.push(transform::to_unconstrained(family, &k));
        }
    }
    for _ in 0..options.restarts {
        starts.push(
            u0.iter()
                .map(|v| v + options.jitter * (2.0 * jitter.random::<f64>() - 1.0))
                .collect(),
        );
    }
    let runs: Vec<Run> = starts.into_iter().map(|u| run_from(&objective, u, options)).collect();
    finish(&objective, runs)
}

/// Fit from a caller-supplied natural-scale start and no restarts.
pub fn fit_from_start(family: Family, y: &[u64], kappa_start: &[f64], options: &FitOptions) -> Result<FitResult> {
    check_series(y)?;
    ModelSpec::from_kappa(family, kappa_start)?;
    let series = PreparedSeries::new(y)?;
    let objective = Objective {
        family,
        series: &series,
        lambda_init: default_lambda_init(y, options),
    };
    let run = run_from(&objective, transform::to_unconstrained(family, kappa_start), options);
    finish(&objective, vec![run])
}

fn finish(objective: &Objective, runs: Vec<Run>) -> Result<FitResult> {
    let family = objective.family;
    let n_restarts = runs.len() - 1;
    let n_evals = runs.iter().map(|r| r.evals).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .expect("at least one start");
    if !best.cost.is_finite() {
        return Err(Error::InvalidInput(format!(
            "{family}: likelihood is not finite at any start"
        )));
    }
    let kappa_hat = transform::to_natural(family, &best.u);
    let spec = ModelSpec::from_kappa(family, &kappa_hat)?;
    let (loglik, clamp_hits) = objective.series.log_likelihood(&spec, objective.lambda_init)?;
    let n_obs = objective.series.len();
    let mut warnings = Vec::new();
    if !best.converged {
        warnings.push("simplex did not meet the tolerance within its evaluation budget".to_owned());
    }
    if clamp_hits > 0 {
        warnings.push(format!("log-mean clamp hit {clamp_hits} times at the optimum"));
    }
    if let Some(alpha) = spec.alpha() {
        if alpha <= 2.0 {
            warnings.push(format!(
                "alpha = {alpha:.3} <= 2: second moments are infinite and normal-theory standard errors are unsupported"
            ));
        }
    }

    let steps = hessian::steps(&kappa_hat);
    let hess = hessian::central_hessian(|k| objective.average_loglik(k), &kappa_hat, &steps);
    let fisher = -hess;
    let covariance = if fisher.iter().all(|v| v.is_finite()) {
        fisher.clone().try_inverse().map(|inv| inv / n_obs as f64)
    } else {
        None
    };
    let se: Vec<Option<f64>> = match &covariance {
        Some(cov) => (0..kappa_hat.len())
            .map(|i| {
                let v = cov[(i, i)];
                (v > 0.0 && v.is_finite()).then(|| v.sqrt())
            })
            .collect(),
        None => vec![None; kappa_hat.len()],
    };
    if covariance.is_none() {
        warnings.push("Hessian is singular; standard errors unavailable".to_owned());
    } else if se.iter().any(Option::is_none) {
        warnings.push("Hessian is not negative definite; some standard errors unavailable".to_owned());
    }

    let names = family.param_names();
    let index = |n: &str| names.iter().position(|&m| m == n).expect("known parameter");
    let (i_omega, i_phi, i_tau) = (index("omega"), index("phi"), index("tau"));
    let (omega, phi, tau) = (kappa_hat[i_omega], kappa_hat[i_phi], kappa_hat[i_tau]);
    let dim = kappa_hat.len();
    let mut grad_delta = vec![0.0; dim];
    let delta_hat = match family.dynamics {
        DynFamily::Ingarch => {
            let gap = 1.0 - phi - tau;
            grad_delta[i_omega] = 1.0 / gap;
            grad_delta[i_phi] = omega / (gap * gap);
            grad_delta[i_tau] = omega / (gap * gap);
            omega / gap
        }
        DynFamily::Gas => {
            let level = (omega / (1.0 - phi)).exp();
            grad_delta[i_omega] = level / (1.0 - phi);
            grad_delta[i_phi] = level * omega / ((1.0 - phi) * (1.0 - phi));
            level
        }
    };
    let delta_se = |grad: &[f64]| -> Option<f64> {
        let cov = covariance.as_ref()?;
        let g = nalgebra::DVector::from_column_slice(grad);
        let v = (g.transpose() * cov * &g)[(0, 0)];
        (v > 0.0 && v.is_finite()).then(|| v.sqrt())
    };
    let r = kappa_hat[0];
    let mut grad_inv_r = vec![0.0; dim];
    grad_inv_r[0] = -1.0 / (r * r);
    let (inv_alpha, se_inv_alpha) = match spec.alpha() {
        Some(alpha) => {
            let mut g = vec![0.0; dim];
            g[1] = -1.0 / (alpha * alpha);
            (Some(1.0 / alpha), delta_se(&g))
        }
        None => (None, None),
    };

    Ok(FitResult {
        family,
        n_obs,
        se_delta: delta_se(&grad_delta),
        se_inv_r: delta_se(&grad_inv_r),
        se_inv_alpha,
        kappa_hat,
        se,
        loglik,
        aic: aic(loglik, dim),
        delta_hat,
        inv_r: 1.0 / r,
        inv_alpha,
        converged: best.converged,
        n_restarts,
        n_evals,
        clamp_hits,
        lambda_init: objective.lambda_init,
        fisher,
        warnings,
    })
}

/// Fits every family in [`Family::ALL`] order.
pub fn fit_all(y: &[u64], options: &FitOptions) -> Result<Vec<FitResult>> {
    Family::ALL
        .par_iter()
        .map(|&family| fit(family, y, options))
        .collect()
}

/// One row of an AIC ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFit {
    pub rank: usize,
    pub family: Family,
    pub n_params: usize,
    pub loglik: f64,
    pub aic: f64,
    pub delta_aic: f64,
}

/// Ranks fits by ascending AIC; ties go to the model with fewer parameters.
pub fn compare(fits: &[FitResult]) -> Result<Vec<RankedFit>> {
    let Some(first) = fits.first() else {
        return Err(Error::InvalidInput("no fits to compare".into()));
    };
    if let Some(other) = fits.iter().find(|f| f.n_obs != first.n_obs) {
        return Err(Error::InvalidInput(format!(
            "fits use different series lengths ({} and {})",
            first.n_obs, other.n_obs
        )));
    }
    let mut order: Vec<&FitResult> = fits.iter().collect();
    order.sort_by(|a, b| a.aic.total_cmp(&b.aic).then(a.n_params().cmp(&b.n_params())));
    let best = order[0].aic;
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, f)| RankedFit {
            rank: i + 1,
            family: f.family,
            n_params: f.n_params(),
            loglik: f.loglik,
            aic: f.aic,
            delta_aic: f.aic - best,
        })
        .collect())
}
