//! Beta-negative-binomial autoregressions for count time series.
//!
//! Conditional laws ([`distributions`]), INGARCH and score-driven mean
//! recursions ([`dynamics`]), seeded path simulation ([`simulation`]),
//! maximum likelihood fitting and AIC comparison ([`estimation`]), and a
//! Monte Carlo replication harness ([`montecarlo`]).
//!
//! ```
//! use bnbar::{fit, simulate, Family, FitOptions, IngarchParams, ModelSpec, SimulateOptions};
//!
//! let spec = ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::from_delta(10.0, 0.5, 0.2)?)?;
//! let path = simulate(&spec, 300, 100, 7, SimulateOptions::default())?;
//! let fitted = fit(Family::BNB_INGARCH, &path.y, &FitOptions::default())?;
//! assert!(fitted.loglik.is_finite());
//! # Ok::<(), bnbar::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod dynamics;
mod error;
pub mod estimation;
pub mod montecarlo;
pub mod simulation;
pub mod special;

pub use distributions::{BnbLaw, BnbMoments, BnbParams, NbLaw, NbParams, ObservationLaw};
pub use dynamics::{
    check_strict_stationarity, check_weak_stationarity, DistFamily, DynFamily, Family, GasParams, IngarchParams,
    ModelSpec, Recursion, Shape, StationarityCheck,
};
pub use error::{Error, Result};
pub use estimation::{compare, filter, fit, fit_all, FilterOutput, FitOptions, FitReport, FitResult, RankedFit};
pub use montecarlo::{run_mc, score_curve, McDesign, McReport};
pub use simulation::{derive_seed, inject_outliers, simulate, SimulateOptions, SimulatedPath};
