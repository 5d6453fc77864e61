//! Conditional-mean recursions λ_{t+1} = g(y_t, λ_t) and their stationarity
//! diagnostics.
//!
//! Two recursions are provided: the linear INGARCH update
//! `ω + φ λ + τ y` and the score-driven (GAS) update
//! `ln λ' = ω + φ ln λ + τ s(y, λ)`, where `s` is the derivative of the
//! conditional log-pmf with respect to ln λ. The full parameter vector of a
//! model is always ordered `(r, α, ω, φ, τ)`, with α absent for the negative
//! binomial families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{BnbLaw, NbLaw, ObservationLaw};
use crate::error::{check_param, Error, Result};

/// `ln λ` is kept inside `[-LOG_LAMBDA_CLAMP, LOG_LAMBDA_CLAMP]` by the GAS update.
pub const LOG_LAMBDA_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistFamily {
    Bnb,
    Nb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DynFamily {
    Ingarch,
    Gas,
}

/// Distribution family × dynamics family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Family {
    pub dist: DistFamily,
    pub dynamics: DynFamily,
}

impl Family {
    pub const BNB_INGARCH: Family = Family::new(DistFamily::Bnb, DynFamily::Ingarch);
    pub const BNB_GAS: Family = Family::new(DistFamily::Bnb, DynFamily::Gas);
    pub const NB_INGARCH: Family = Family::new(DistFamily::Nb, DynFamily::Ingarch);
    pub const NB_GAS: Family = Family::new(DistFamily::Nb, DynFamily::Gas);

    /// Table order used by model comparisons.
    pub const ALL: [Family; 4] = [
        Family::BNB_INGARCH,
        Family::BNB_GAS,
        Family::NB_INGARCH,
        Family::NB_GAS,
    ];

    pub const fn new(dist: DistFamily, dynamics: DynFamily) -> Self {
        Self { dist, dynamics }
    }

    pub fn n_params(&self) -> usize {
        self.param_names().len()
    }

    /// Names of κ in storage order.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self.dist {
            DistFamily::Bnb => &["r", "alpha", "omega", "phi", "tau"],
            DistFamily::Nb => &["r", "omega", "phi", "tau"],
        }
    }

    pub fn has_alpha(&self) -> bool {
        self.dist == DistFamily::Bnb
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dist = match self.dist {
            DistFamily::Bnb => "bnb",
            DistFamily::Nb => "nb",
        };
        let dynamics = match self.dynamics {
            DynFamily::Ingarch => "ingarch",
            DynFamily::Gas => "gas",
        };
        write!(f, "{dist}-{dynamics}")
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bnb-ingarch" => Ok(Family::BNB_INGARCH),
            "bnb-gas" => Ok(Family::BNB_GAS),
            "nb-ingarch" => Ok(Family::NB_INGARCH),
            "nb-gas" => Ok(Family::NB_GAS),
            other => Err(Error::InvalidInput(format!(
                "unknown model family '{other}' (expected bnb-ingarch, bnb-gas, nb-ingarch or nb-gas)"
            ))),
        }
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Family {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters of λ_{t+1} = ω + φ λ_t + τ y_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngarchParams {
    omega: f64,
    phi: f64,
    tau: f64,
}

impl IngarchParams {
    pub fn new(omega: f64, phi: f64, tau: f64) -> Result<Self> {
        check_param("omega", omega, omega > 0.0, "INGARCH intercept must be positive")?;
        check_param("phi", phi, phi >= 0.0, "INGARCH persistence must be non-negative")?;
        check_param("tau", tau, tau > 0.0, "INGARCH observation loading must be positive")?;
        Ok(Self { omega, phi, tau })
    }

    /// Builds the recursion whose unconditional mean is `delta`.
    pub fn from_delta(delta: f64, phi: f64, tau: f64) -> Result<Self> {
        check_param("delta", delta, delta > 0.0, "unconditional mean must be positive")?;
        if !(phi + tau < 1.0) {
            return Err(Error::NonStationary(format!(
                "the unconditional mean delta requires tau + phi < 1 (got {})",
                phi + tau
            )));
        }
        Self::new(delta * (1.0 - phi - tau), phi, tau)
    }

    pub(crate) fn new_unchecked(omega: f64, phi: f64, tau: f64) -> Self {
        Self { omega, phi, tau }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn update(&self, y: u64, lambda: f64) -> f64 {
        self.omega + self.phi * lambda + self.tau * y as f64
    }

    /// δ = ω / (1 − φ − τ); infinite outside the stationarity region.
    pub fn unconditional_mean(&self) -> f64 {
        let persistence = self.phi + self.tau;
        if persistence < 1.0 {
            self.omega / (1.0 - persistence)
        } else {
            f64::INFINITY
        }
    }
}

/// Parameters of ln λ_{t+1} = ω + φ ln λ_t + τ s_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    omega: f64,
    phi: f64,
    tau: f64,
}

/// Result of one GAS step; `clamped` is set when ln λ hit the overflow clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasStep {
    pub lambda: f64,
    pub clamped: bool,
}

impl GasParams {
    pub fn new(omega: f64, phi: f64, tau: f64) -> Result<Self> {
        check_param("omega", omega, true, "GAS intercept must be finite")?;
        check_param("phi", phi, (0.0..1.0).contains(&phi), "GAS persistence must lie in [0, 1)")?;
        check_param("tau", tau, tau > 0.0, "GAS score loading must be positive")?;
        Ok(Self { omega, phi, tau })
    }

    /// Builds the recursion whose stationary level exp(ω / (1 − φ)) is `delta`.
    pub fn from_delta(delta: f64, phi: f64, tau: f64) -> Result<Self> {
        check_param("delta", delta, delta > 0.0, "mean level must be positive")?;
        check_param("phi", phi, (0.0..1.0).contains(&phi), "GAS persistence must lie in [0, 1)")?;
        Self::new((1.0 - phi) * delta.ln(), phi, tau)
    }

    pub(crate) fn new_unchecked(omega: f64, phi: f64, tau: f64) -> Self {
        Self { omega, phi, tau }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn update(&self, y: u64, lambda: f64, law: &ObservationLaw) -> GasStep {
        let s = law.score_log_lambda(y, lambda);
        let log_next = self.omega + self.phi * lambda.ln() + self.tau * s;
        let clamped = !(log_next.abs() <= LOG_LAMBDA_CLAMP);
        let log_next = if log_next.is_nan() {
            LOG_LAMBDA_CLAMP
        } else {
            log_next.clamp(-LOG_LAMBDA_CLAMP, LOG_LAMBDA_CLAMP)
        };
        GasStep {
            lambda: log_next.exp(),
            clamped,
        }
    }

    /// exp(ω / (1 − φ)), the level around which ln λ fluctuates.
    pub fn unconditional_level(&self) -> f64 {
        (self.omega / (1.0 - self.phi)).exp()
    }
}

/// Shape parameters ξ of the conditional law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub r: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Recursion {
    Ingarch(IngarchParams),
    Gas(GasParams),
}

impl Recursion {
    pub fn omega(&self) -> f64 {
        match self {
            Recursion::Ingarch(p) => p.omega,
            Recursion::Gas(p) => p.omega,
        }
    }

    pub fn phi(&self) -> f64 {
        match self {
            Recursion::Ingarch(p) => p.phi,
            Recursion::Gas(p) => p.phi,
        }
    }

    pub fn tau(&self) -> f64 {
        match self {
            Recursion::Ingarch(p) => p.tau,
            Recursion::Gas(p) => p.tau,
        }
    }
}

/// A fully specified model: family, shape ξ and recursion θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    shape: Shape,
    recursion: Recursion,
}

impl ModelSpec {
    pub fn new(shape: Shape, recursion: Recursion) -> Result<Self> {
        match shape.alpha {
            Some(alpha) => {
                BnbLaw::new(shape.r, alpha)?;
            }
            None => {
                NbLaw::new(shape.r)?;
            }
        }
        match recursion {
            Recursion::Ingarch(p) => {
                IngarchParams::new(p.omega, p.phi, p.tau)?;
            }
            Recursion::Gas(p) => {
                GasParams::new(p.omega, p.phi, p.tau)?;
            }
        }
        Ok(Self { shape, recursion })
    }

    pub fn bnb_ingarch(r: f64, alpha: f64, theta: IngarchParams) -> Result<Self> {
        Self::new(Shape { r, alpha: Some(alpha) }, Recursion::Ingarch(theta))
    }

    pub fn bnb_gas(r: f64, alpha: f64, theta: GasParams) -> Result<Self> {
        Self::new(Shape { r, alpha: Some(alpha) }, Recursion::Gas(theta))
    }

    pub fn nb_ingarch(r: f64, theta: IngarchParams) -> Result<Self> {
        Self::new(Shape { r, alpha: None }, Recursion::Ingarch(theta))
    }

    pub fn nb_gas(r: f64, theta: GasParams) -> Result<Self> {
        Self::new(Shape { r, alpha: None }, Recursion::Gas(theta))
    }

    /// Builds a spec from κ in `(r, α, ω, φ, τ)` order (α omitted for NB).
    pub fn from_kappa(family: Family, kappa: &[f64]) -> Result<Self> {
        let spec = Self::from_kappa_unchecked(family, kappa)?;
        Self::new(spec.shape, spec.recursion)
    }

    /// Like [`from_kappa`](Self::from_kappa) but skips the θ domain checks,
    /// which numerical differentiation at boundary optima needs.
    pub(crate) fn from_kappa_unchecked(family: Family, kappa: &[f64]) -> Result<Self> {
        if kappa.len() != family.n_params() {
            return Err(Error::InvalidInput(format!(
                "{family} has {} parameters, got {}",
                family.n_params(),
                kappa.len()
            )));
        }
        let (alpha, theta) = match family.dist {
            DistFamily::Bnb => (Some(kappa[1]), &kappa[2..]),
            DistFamily::Nb => (None, &kappa[1..]),
        };
        let recursion = match family.dynamics {
            DynFamily::Ingarch => Recursion::Ingarch(IngarchParams::new_unchecked(theta[0], theta[1], theta[2])),
            DynFamily::Gas => Recursion::Gas(GasParams::new_unchecked(theta[0], theta[1], theta[2])),
        };
        Ok(Self {
            shape: Shape { r: kappa[0], alpha },
            recursion,
        })
    }

    pub fn kappa(&self) -> Vec<f64> {
        let mut k = vec![self.shape.r];
        k.extend(self.shape.alpha);
        k.extend([self.recursion.omega(), self.recursion.phi(), self.recursion.tau()]);
        k
    }

    pub fn family(&self) -> Family {
        let dist = if self.shape.alpha.is_some() {
            DistFamily::Bnb
        } else {
            DistFamily::Nb
        };
        let dynamics = match self.recursion {
            Recursion::Ingarch(_) => DynFamily::Ingarch,
            Recursion::Gas(_) => DynFamily::Gas,
        };
        Family::new(dist, dynamics)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn recursion(&self) -> Recursion {
        self.recursion
    }

    pub fn r(&self) -> f64 {
        self.shape.r
    }

    pub fn alpha(&self) -> Option<f64> {
        self.shape.alpha
    }

    pub fn law(&self) -> ObservationLaw {
        match self.shape.alpha {
            Some(alpha) => ObservationLaw::Bnb(BnbLaw::new_unchecked(self.shape.r, alpha)),
            None => ObservationLaw::Nb(NbLaw::new_unchecked(self.shape.r)),
        }
    }

    /// The level used to start simulations: δ for INGARCH, exp(ω/(1−φ)) for GAS.
    pub fn delta(&self) -> f64 {
        match self.recursion {
            Recursion::Ingarch(p) => p.unconditional_mean(),
            Recursion::Gas(p) => p.unconditional_level(),
        }
    }

    /// One step of the recursion with a precomputed law.
    pub fn step(&self, law: &ObservationLaw, y: u64, lambda: f64) -> GasStep {
        match self.recursion {
            Recursion::Ingarch(p) => GasStep {
                lambda: p.update(y, lambda),
                clamped: false,
            },
            Recursion::Gas(p) => p.update(y, lambda, law),
        }
    }
}

/// Outcome of a stationarity diagnostic.
///
/// `margin` is the left-hand side of the condition, which holds iff it is
/// below one. It is absent when the condition cannot be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityCheck {
    pub holds: bool,
    pub margin: Option<f64>,
    pub condition: String,
    /// Set when the condition is sufficient but not necessary.
    pub sufficient_only: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

impl StationarityCheck {
    fn from_margin(margin: f64, condition: &str, sufficient_only: bool) -> Self {
        Self {
            holds: margin < 1.0,
            margin: Some(margin),
            condition: condition.to_owned(),
            sufficient_only,
            reason: None,
        }
    }

    fn unavailable(condition: &str, reason: &str) -> Self {
        Self {
            holds: false,
            margin: None,
            condition: condition.to_owned(),
            sufficient_only: true,
            reason: Some(reason.to_owned()),
        }
    }
}

const GAS_CONDITION: &str = "(tau (gamma (3 alpha + 2 r + 3) + alpha + r + 1) / gamma + phi) exp(tau (2 alpha + r + 2)) < 1";

/// Left-hand side of the BNB-GAS contraction condition, γ = (α − 1)/r.
pub fn gas_contraction_margin(r: f64, alpha: f64, phi: f64, tau: f64) -> f64 {
    let gamma = (alpha - 1.0) / r;
    (tau * (gamma * (3.0 * alpha + 2.0 * r + 3.0) + (alpha + r + 1.0)) / gamma + phi)
        * (tau * (2.0 * alpha + r + 2.0)).exp()
}

/// Strict stationarity and ergodicity.
///
/// INGARCH: τ + φ < 1 (necessary and sufficient for the contraction). BNB-GAS:
/// the sufficient contraction condition above. NB-GAS has an unbounded score
/// and no closed-form condition.
pub fn check_strict_stationarity(spec: &ModelSpec) -> StationarityCheck {
    match (spec.recursion, spec.alpha()) {
        (Recursion::Ingarch(p), _) => StationarityCheck::from_margin(p.tau + p.phi, "tau + phi < 1", false),
        (Recursion::Gas(p), Some(alpha)) => {
            StationarityCheck::from_margin(gas_contraction_margin(spec.r(), alpha, p.phi, p.tau), GAS_CONDITION, true)
        }
        (Recursion::Gas(_), None) => StationarityCheck::unavailable(
            "none",
            "the negative binomial score is unbounded; no sufficient contraction condition is available",
        ),
    }
}

/// Weak stationarity (finite second moment of y_t).
pub fn check_weak_stationarity(spec: &ModelSpec) -> StationarityCheck {
    const INGARCH_CONDITION: &str = "(r + 1)(alpha - 1) / (r (alpha - 2)) tau^2 + phi^2 + 2 tau phi < 1";
    let r = spec.r();
    match (spec.recursion, spec.alpha()) {
        (_, Some(alpha)) if alpha <= 2.0 => StationarityCheck {
            holds: false,
            margin: None,
            condition: "alpha > 2".to_owned(),
            sufficient_only: false,
            reason: Some("second conditional moment infinite (alpha <= 2)".to_owned()),
        },
        (Recursion::Ingarch(p), Some(alpha)) => {
            let c = (r + 1.0) * (alpha - 1.0) / (r * (alpha - 2.0));
            let margin = c * p.tau * p.tau + p.phi * p.phi + 2.0 * p.tau * p.phi;
            StationarityCheck::from_margin(margin, INGARCH_CONDITION, false)
        }
        (Recursion::Ingarch(p), None) => {
            let c = (r + 1.0) / r;
            let margin = c * p.tau * p.tau + p.phi * p.phi + 2.0 * p.tau * p.phi;
            StationarityCheck::from_margin(margin, "(r + 1) / r tau^2 + phi^2 + 2 tau phi < 1", false)
        }
        (Recursion::Gas(_), Some(_)) => {
            // λ_t lives on a compact set under the contraction, so α > 2 suffices.
            let mut check = check_strict_stationarity(spec);
            check.condition = format!("{GAS_CONDITION} and alpha > 2");
            check
        }
        (Recursion::Gas(_), None) => check_strict_stationarity(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn recovery_truth(phi: f64) -> ModelSpec {
        ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::from_delta(10.0, phi, 0.2).unwrap()).unwrap()
    }

    #[test]
    fn ingarch_update_arithmetic() {
        let p = IngarchParams::new(1.0, 0.5, 0.3).unwrap();
        assert_eq!(p.update(0, 2.0), 2.0);
        let p = IngarchParams::from_delta(10.0, 0.5, 0.2).unwrap();
        assert_abs_diff_eq!(p.omega(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.update(10, 10.0), 10.0, epsilon = 1e-14);
        assert!(p.update(0, 1e-12) >= p.omega());
    }

    #[test]
    fn ingarch_rejects_bad_domain() {
        assert!(IngarchParams::new(0.0, 0.5, 0.2).is_err());
        assert!(IngarchParams::new(1.0, -0.1, 0.2).is_err());
        assert!(IngarchParams::new(1.0, 0.5, 0.0).is_err());
        assert!(matches!(IngarchParams::from_delta(10.0, 0.9, 0.2), Err(Error::NonStationary(_))));
    }

    #[test]
    fn gas_rejects_bad_domain() {
        assert!(GasParams::new(0.1, 1.0, 0.2).is_err());
        assert!(GasParams::new(0.1, 0.5, -0.2).is_err());
        assert!(GasParams::new(-3.0, 0.0, 0.2).is_ok());
    }

    #[test]
    fn gas_update_with_zero_score() {
        // NB score vanishes at y = λ
        let law = ObservationLaw::Nb(NbLaw::new(4.0).unwrap());
        let p = GasParams::new(0.3, 0.6, 0.25).unwrap();
        let step = p.update(9, 9.0, &law);
        assert_abs_diff_eq!(step.lambda, 0.3f64.exp() * 9f64.powf(0.6), epsilon = 1e-12);
        assert!(!step.clamped);
    }

    #[test]
    fn gas_overflow_clamp() {
        let law = ObservationLaw::Nb(NbLaw::new(1e3).unwrap());
        let p = GasParams::new(40.0, 0.5, 5.0).unwrap();
        let step = p.update(1_000_000, 10.0, &law);
        assert!(step.clamped);
        assert_abs_diff_eq!(step.lambda.ln(), LOG_LAMBDA_CLAMP, epsilon = 1e-12);
    }

    #[test]
    fn gas_outlier_attenuation_bounded_by_score_cap() {
        let (r, alpha) = (4.408, 5.029);
        let law = ObservationLaw::Bnb(BnbLaw::new(r, alpha).unwrap());
        let p = GasParams::new(0.597, 0.714, 0.197).unwrap();
        for &lambda in &[2.0f64, 8.0, 30.0] {
            let y_typical = lambda.round() as u64;
            let base = p.update(y_typical, lambda, &law).lambda;
            let outlier = p.update(10 * y_typical, lambda, &law).lambda;
            let s_typical = law.score_log_lambda(y_typical, lambda);
            let bound = (p.tau() * (alpha + 1.0 - s_typical)).exp();
            assert!(outlier > base);
            assert!(outlier / base <= bound, "lambda = {lambda}");
        }
    }

    #[test]
    fn gas_updates_contract() {
        let law = ObservationLaw::Bnb(BnbLaw::new(10.0, 5.0).unwrap());
        let p = GasParams::new(0.2, 0.1, 0.001).unwrap();
        assert!(gas_contraction_margin(10.0, 5.0, 0.1, 0.001) < 1.0);
        let (mut a, mut b) = (5.0_f64, 500.0_f64);
        let mut gaps = Vec::new();
        for y in [3u64, 0, 7, 12, 1, 4, 4, 9] {
            a = p.update(y, a, &law).lambda;
            b = p.update(y, b, &law).lambda;
            gaps.push((a.ln() - b.ln()).abs());
        }
        for w in gaps.windows(2) {
            assert!(w[1] < 0.2 * w[0] || w[1] < 1e-14);
        }
    }

    #[test]
    fn strict_stationarity_examples() {
        let c = check_strict_stationarity(&recovery_truth(0.5));
        assert!(c.holds);
        assert_abs_diff_eq!(c.margin.unwrap(), 0.7, epsilon = 1e-15);
        let spec = ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::new(1.0, 0.9, 0.2).unwrap()).unwrap();
        let c = check_strict_stationarity(&spec);
        assert!(!c.holds);
        assert_abs_diff_eq!(c.margin.unwrap(), 1.1, epsilon = 1e-15);
    }

    #[test]
    fn gas_condition_direct_evaluation() {
        let spec = ModelSpec::bnb_gas(10.0, 5.0, GasParams::new(0.2, 0.1, 0.001).unwrap()).unwrap();
        let c = check_strict_stationarity(&spec);
        // γ = 0.4: (0.001 (0.4·38 + 16)/0.4 + 0.1) e^{0.022}
        let expected = (0.001 * (0.4 * 38.0 + 16.0) / 0.4 + 0.1) * 0.022f64.exp();
        assert_abs_diff_eq!(c.margin.unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.181_959_4, epsilon = 1e-7);
        assert!(c.holds && c.sufficient_only);

        let nb = ModelSpec::nb_gas(3.0, GasParams::new(0.2, 0.1, 0.001).unwrap()).unwrap();
        let c = check_strict_stationarity(&nb);
        assert!(!c.holds && c.margin.is_none() && c.reason.is_some());
    }

    #[test]
    fn weak_stationarity_examples() {
        let c = check_weak_stationarity(&recovery_truth(0.5));
        assert_abs_diff_eq!(c.margin.unwrap(), 44.0 / 30.0 * 0.04 + 0.25 + 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(c.margin.unwrap(), 0.5087, epsilon = 1e-4);
        assert!(c.holds);

        let c = check_weak_stationarity(&recovery_truth(0.68));
        assert_abs_diff_eq!(c.margin.unwrap(), 0.7931, epsilon = 1e-4);
        assert!(c.holds);

        let spec = ModelSpec::bnb_ingarch(10.0, 2.0, IngarchParams::new(1.0, 0.5, 0.2).unwrap()).unwrap();
        let c = check_weak_stationarity(&spec);
        assert!(!c.holds);
        assert!(c.reason.unwrap().contains("infinite"));
    }

    #[test]
    fn kappa_order_round_trip() {
        let spec = recovery_truth(0.5);
        let k = spec.kappa();
        assert_eq!(k.len(), 5);
        assert_eq!(k[0], 10.0);
        assert_eq!(k[1], 5.0);
        assert_eq!(ModelSpec::from_kappa(Family::BNB_INGARCH, &k).unwrap(), spec);
        let nb = ModelSpec::nb_gas(2.0, GasParams::new(0.1, 0.3, 0.4).unwrap()).unwrap();
        assert_eq!(nb.kappa(), vec![2.0, 0.1, 0.3, 0.4]);
        assert_eq!(nb.family(), Family::NB_GAS);
        assert!(ModelSpec::from_kappa(Family::NB_GAS, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn family_names() {
        for f in Family::ALL {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert!("poisson-ingarch".parse::<Family>().is_err());
        assert_eq!(Family::NB_INGARCH.param_names(), &["r", "omega", "phi", "tau"]);
    }

    proptest! {
        #[test]
        fn ingarch_is_lipschitz(
            omega in 0.01f64..10.0, phi in 0.0f64..0.99, tau in 0.01f64..0.99,
            y1 in 0u64..10_000, y2 in 0u64..10_000,
            l1 in 1e-3f64..1e4, l2 in 1e-3f64..1e4,
        ) {
            let p = IngarchParams::new(omega, phi, tau).unwrap();
            let lhs = (p.update(y1, l1) - p.update(y2, l2)).abs();
            let rhs = tau * (y1 as f64 - y2 as f64).abs() + phi * (l1 - l2).abs();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn gas_output_positive(
            omega in -5.0f64..5.0, phi in 0.0f64..0.999, tau in 0.001f64..3.0,
            y in 0u64..100_000, lambda in 1e-6f64..1e6,
            r in 0.1f64..50.0, alpha in 1.01f64..30.0,
        ) {
            let law = ObservationLaw::Bnb(BnbLaw::new(r, alpha).unwrap());
            let step = GasParams::new(omega, phi, tau).unwrap().update(y, lambda, &law);
            prop_assert!(step.lambda > 0.0 && step.lambda.is_finite());
        }
    }
}
