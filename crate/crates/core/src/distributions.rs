//! Beta-negative-binomial and negative-binomial laws in the mean
//! parametrization.
//!
//! A BNB(λ, r, α) variable is a negative binomial NB(r, P) whose success
//! probability is itself Beta(α, β) with β = (α − 1) λ / r, so that λ is the
//! mean whenever α > 1. All mass functions are evaluated in log space.
//!
//! The λ-free parts of each law live in [`BnbLaw`] and [`NbLaw`]; the filter
//! reuses one law across every time step while λ changes.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{check_param, Error, Result};
use crate::special::{digamma_diff, ln_gamma, ln_gamma_ratio};

/// Cumulative probability at which cdf and quantile sweeps stop.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Largest support point visited by cdf and quantile sweeps.
pub const MAX_SUPPORT: u64 = 10_000_000;

/// How often the ratio recurrence is re-anchored to a direct evaluation.
const REANCHOR_EVERY: u64 = 512;

/// Poisson draws with larger means use a rounded normal approximation.
const POISSON_NORMAL_CUTOFF: f64 = 1e12;

fn ln_factorial(y: u64) -> f64 {
    ln_gamma(y as f64 + 1.0)
}

/// `ln Γ(y + r) − ln Γ(y + 1) − ln Γ(r)`.
fn ln_nb_coefficient(y: u64, r: f64) -> f64 {
    ln_gamma_ratio(r, y as f64) - ln_factorial(y)
}

fn check_lambda(lambda: f64) -> Result<()> {
    check_param("lambda", lambda, lambda > 0.0, "conditional mean must be positive")
}

fn check_r(r: f64) -> Result<()> {
    check_param("r", r, r > 0.0, "dispersion must be positive")
}

fn check_alpha(alpha: f64) -> Result<()> {
    check_param(
        "alpha",
        alpha,
        alpha > 1.0,
        "tail parameter must exceed 1 for the mean to exist",
    )
}

/// The λ-independent part of a BNB law: dispersion `r` and tail `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbLaw {
    r: f64,
    alpha: f64,
    gamma: f64,
    ln_shape: f64,
}

impl BnbLaw {
    pub fn new(r: f64, alpha: f64) -> Result<Self> {
        check_r(r)?;
        check_alpha(alpha)?;
        Ok(Self::new_unchecked(r, alpha))
    }

    pub(crate) fn new_unchecked(r: f64, alpha: f64) -> Self {
        Self {
            r,
            alpha,
            gamma: (alpha - 1.0) / r,
            ln_shape: ln_gamma_ratio(alpha, r),
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// γ = (α − 1)/r, so that β = γλ.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn ln_pmf(&self, y: u64, lambda: f64) -> f64 {
        self.ln_pmf_with_coefficient(y, lambda, ln_nb_coefficient(y, self.r))
    }

    /// Log-pmf given a precomputed `ln Γ(y + r) − ln Γ(y + 1) − ln Γ(r)`.
    pub(crate) fn ln_pmf_with_coefficient(&self, y: u64, lambda: f64, coefficient: f64) -> f64 {
        let beta = self.gamma * lambda;
        let yf = y as f64;
        // ln B(α + r, β + y) − ln B(α, β)
        coefficient + self.ln_shape + ln_gamma_ratio(beta, yf)
            - ln_gamma_ratio(self.alpha + beta, self.r + yf)
    }

    /// Derivative of the log-pmf with respect to ln λ.
    pub fn score_log_lambda(&self, y: u64, lambda: f64) -> f64 {
        let beta = self.gamma * lambda;
        let yf = y as f64;
        beta * (digamma_diff(beta, yf) - digamma_diff(self.alpha + beta, self.r + yf))
    }

    /// `p(y + 1) / p(y)`.
    pub fn pmf_ratio(&self, y: u64, lambda: f64) -> f64 {
        let beta = self.gamma * lambda;
        let yf = y as f64;
        (yf + self.r) * (beta + yf) / ((yf + 1.0) * (self.alpha + beta + self.r + yf))
    }

    pub fn sample<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> u64 {
        let beta = self.gamma * lambda;
        let p: f64 = match Beta::new(self.alpha, beta) {
            Ok(d) => d.sample(rng),
            Err(_) => return 0,
        };
        if p >= 1.0 {
            return 0;
        }
        gamma_poisson(self.r, (1.0 - p) / p, rng)
    }
}

/// The λ-independent part of a negative binomial law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbLaw {
    r: f64,
}

impl NbLaw {
    pub fn new(r: f64) -> Result<Self> {
        check_r(r)?;
        Ok(Self { r })
    }

    pub(crate) fn new_unchecked(r: f64) -> Self {
        Self { r }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn ln_pmf(&self, y: u64, lambda: f64) -> f64 {
        self.ln_pmf_with_coefficient(y, lambda, ln_nb_coefficient(y, self.r))
    }

    pub(crate) fn ln_pmf_with_coefficient(&self, y: u64, lambda: f64, coefficient: f64) -> f64 {
        let r = self.r;
        let tail = if y == 0 {
            0.0
        } else {
            y as f64 * (lambda.ln() - (r + lambda).ln())
        };
        coefficient - r * (lambda / r).ln_1p() + tail
    }

    /// r (y − λ) / (r + λ).
    pub fn score_log_lambda(&self, y: u64, lambda: f64) -> f64 {
        self.r * (y as f64 - lambda) / (self.r + lambda)
    }

    pub fn sample<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> u64 {
        gamma_poisson(self.r, lambda / self.r, rng)
    }
}

/// Either conditional law, as used by the filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationLaw {
    Bnb(BnbLaw),
    Nb(NbLaw),
}

impl ObservationLaw {
    pub fn r(&self) -> f64 {
        match self {
            ObservationLaw::Bnb(l) => l.r(),
            ObservationLaw::Nb(l) => l.r(),
        }
    }

    pub fn ln_pmf(&self, y: u64, lambda: f64) -> f64 {
        match self {
            ObservationLaw::Bnb(l) => l.ln_pmf(y, lambda),
            ObservationLaw::Nb(l) => l.ln_pmf(y, lambda),
        }
    }

    pub(crate) fn ln_pmf_with_coefficient(&self, y: u64, lambda: f64, coefficient: f64) -> f64 {
        match self {
            ObservationLaw::Bnb(l) => l.ln_pmf_with_coefficient(y, lambda, coefficient),
            ObservationLaw::Nb(l) => l.ln_pmf_with_coefficient(y, lambda, coefficient),
        }
    }

    pub fn score_log_lambda(&self, y: u64, lambda: f64) -> f64 {
        match self {
            ObservationLaw::Bnb(l) => l.score_log_lambda(y, lambda),
            ObservationLaw::Nb(l) => l.score_log_lambda(y, lambda),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> u64 {
        match self {
            ObservationLaw::Bnb(l) => l.sample(lambda, rng),
            ObservationLaw::Nb(l) => l.sample(lambda, rng),
        }
    }
}

/// Λ ~ Gamma(shape, scale), then Poisson(Λ).
fn gamma_poisson<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> u64 {
    if !(scale > 0.0) {
        return 0;
    }
    let scale = scale.min(1e300);
    let rate: f64 = match Gamma::new(shape, scale) {
        Ok(d) => d.sample(rng),
        Err(_) => return 0,
    };
    poisson(rate, rng)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean > POISSON_NORMAL_CUTOFF {
        let draw: f64 = Normal::new(mean, mean.sqrt())
            .map(|d| d.sample(rng))
            .unwrap_or(mean);
        return draw.round().clamp(0.0, 1e18) as u64;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// Static parameters of a BNB(λ, r, α) distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBnb")]
pub struct BnbParams {
    lambda: f64,
    r: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawBnb {
    lambda: f64,
    r: f64,
    alpha: f64,
}

impl TryFrom<RawBnb> for BnbParams {
    type Error = Error;
    fn try_from(raw: RawBnb) -> Result<Self> {
        BnbParams::new(raw.lambda, raw.r, raw.alpha)
    }
}

/// First two moments of a BNB distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

impl BnbParams {
    pub fn new(lambda: f64, r: f64, alpha: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_r(r)?;
        check_alpha(alpha)?;
        Ok(Self { lambda, r, alpha })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// β = (α − 1) λ / r.
    pub fn beta(&self) -> f64 {
        (self.alpha - 1.0) * self.lambda / self.r
    }

    /// γ = (α − 1) / r.
    pub fn gamma(&self) -> f64 {
        (self.alpha - 1.0) / self.r
    }

    pub fn law(&self) -> BnbLaw {
        BnbLaw::new_unchecked(self.r, self.alpha)
    }

    pub fn ln_pmf(&self, y: u64) -> f64 {
        self.law().ln_pmf(y, self.lambda)
    }

    pub fn pmf(&self, y: u64) -> f64 {
        self.ln_pmf(y).exp()
    }

    /// Iterator over `(y, P(Y = y))` for y = 0, 1, 2, ... using the ratio
    /// recurrence with periodic re-anchoring.
    pub fn pmf_iter(&self) -> PmfIter {
        PmfIter {
            law: self.law(),
            lambda: self.lambda,
            y: 0,
            pmf: self.pmf(0),
        }
    }

    /// P(Y ≤ y).
    pub fn cdf(&self, y: u64) -> Result<f64> {
        let mut cumulative = 0.0;
        for (k, p) in self.pmf_iter() {
            cumulative += p;
            if k == y || cumulative >= 1.0 - TAIL_TOLERANCE {
                return Ok(cumulative.min(1.0));
            }
            if k >= MAX_SUPPORT {
                return Err(Error::Truncation {
                    support: k,
                    cumulative,
                });
            }
        }
        unreachable!("pmf iterator is infinite")
    }

    /// Smallest y with P(Y ≤ y) ≥ u.
    pub fn quantile(&self, u: f64) -> Result<u64> {
        check_param("u", u, u > 0.0 && u < 1.0, "quantile level must lie in (0, 1)")?;
        let mut cumulative = 0.0;
        for (k, p) in self.pmf_iter() {
            cumulative += p;
            if cumulative >= u {
                return Ok(k);
            }
            if k >= MAX_SUPPORT {
                return Err(Error::Truncation {
                    support: k,
                    cumulative,
                });
            }
        }
        unreachable!("pmf iterator is infinite")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.law().sample(self.lambda, rng)
    }

    pub fn mean(&self) -> f64 {
        self.lambda
    }

    /// Mean, second moment and variance; the latter two need α > 2.
    pub fn moments(&self) -> Result<BnbMoments> {
        let (l, r, a) = (self.lambda, self.r, self.alpha);
        if a <= 2.0 {
            return Err(Error::MomentUndefined { order: 2, alpha: a });
        }
        let second_moment = (a + r - 1.0) / (a - 2.0) * l + (r + 1.0) * (a - 1.0) / (r * (a - 2.0)) * l * l;
        Ok(BnbMoments {
            mean: l,
            second_moment,
            variance: second_moment - l * l,
        })
    }

    pub fn score_log_lambda(&self, y: u64) -> f64 {
        self.law().score_log_lambda(y, self.lambda)
    }
}

/// See [`BnbParams::pmf_iter`].
#[derive(Debug, Clone)]
pub struct PmfIter {
    law: BnbLaw,
    lambda: f64,
    y: u64,
    pmf: f64,
}

impl Iterator for PmfIter {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        let out = (self.y, self.pmf);
        let ratio = self.law.pmf_ratio(self.y, self.lambda);
        self.y += 1;
        self.pmf = if self.y.is_multiple_of(REANCHOR_EVERY) {
            self.law.ln_pmf(self.y, self.lambda).exp()
        } else {
            self.pmf * ratio
        };
        Some(out)
    }
}

/// Static parameters of a negative binomial with mean λ and dispersion r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    lambda: f64,
    r: f64,
}

impl NbParams {
    pub fn new(lambda: f64, r: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_r(r)?;
        Ok(Self { lambda, r })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// λ / (r + λ), the per-trial probability of a counted event.
    pub fn success_probability(&self) -> f64 {
        self.lambda / (self.r + self.lambda)
    }

    pub fn law(&self) -> NbLaw {
        NbLaw::new_unchecked(self.r)
    }

    pub fn ln_pmf(&self, y: u64) -> f64 {
        self.law().ln_pmf(y, self.lambda)
    }

    pub fn pmf(&self, y: u64) -> f64 {
        self.ln_pmf(y).exp()
    }

    pub fn score_log_lambda(&self, y: u64) -> f64 {
        self.law().score_log_lambda(y, self.lambda)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.law().sample(self.lambda, rng)
    }
}
