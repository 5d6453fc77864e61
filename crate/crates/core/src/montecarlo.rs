//! Simulate–fit replication harness and score-curve tables.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::BnbLaw;
use crate::dynamics::{check_strict_stationarity, ModelSpec, Recursion};
use crate::error::{Error, Result};
use crate::estimation::{fit, FitOptions, FitResult};
use crate::simulation::{derive_seed, simulate, SimulateOptions, DEFAULT_BURN_IN};

/// Failure share above which a report is flagged.
pub const FAILURE_FLAG_SHARE: f64 = 0.10;

/// Shortest sample size allowed in a design.
pub const MIN_T: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDesign {
    pub truth: ModelSpec,
    pub t_grid: Vec<usize>,
    pub n_reps: usize,
    pub base_seed: u64,
    pub burn_in: usize,
    pub fit: FitOptions,
    /// Worker threads; 0 uses the rayon default. Never affects the report.
    #[serde(skip)]
    pub workers: usize,
}

impl McDesign {
    pub fn new(truth: ModelSpec, t_grid: Vec<usize>, n_reps: usize, base_seed: u64) -> Result<Self> {
        let design = Self {
            truth,
            t_grid,
            n_reps,
            base_seed,
            burn_in: DEFAULT_BURN_IN,
            fit: FitOptions::default(),
            workers: 0,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidInput("n_reps must be at least 1".into()));
        }
        if self.t_grid.is_empty() {
            return Err(Error::InvalidInput("T grid is empty".into()));
        }
        if let Some(&t) = self.t_grid.iter().find(|&&t| t < MIN_T) {
            return Err(Error::InvalidInput(format!("T = {t} is below the minimum of {MIN_T}")));
        }
        Ok(())
    }

    /// Names of the reported quantities for the truth's family.
    pub fn report_params(&self) -> Vec<&'static str> {
        let mut names = vec!["delta", "phi", "tau", "inv_r"];
        if self.truth.alpha().is_some() {
            names.push("inv_alpha");
        }
        names
    }

    /// Seed of replication `k` at sample size `t`.
    pub fn seed(&self, t: usize, k: usize) -> u64 {
        derive_seed(self.base_seed, t as u64, k as u64)
    }
}

/// True value of a reported quantity.
pub fn truth_value(spec: &ModelSpec, name: &str) -> Option<f64> {
    let (phi, tau) = (spec.recursion().phi(), spec.recursion().tau());
    match name {
        "delta" => Some(spec.delta()),
        "omega" => Some(spec.recursion().omega()),
        "phi" => Some(phi),
        "tau" => Some(tau),
        "r" => Some(spec.r()),
        "alpha" => spec.alpha(),
        "inv_r" => Some(1.0 / spec.r()),
        "inv_alpha" => spec.alpha().map(|a| 1.0 / a),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    #[serde(rename = "T")]
    pub t: usize,
    pub parameter: String,
    pub truth: f64,
    pub mean: f64,
    /// Population standard deviation over successful replications.
    pub sd: f64,
    pub rmse: f64,
    /// Mean reported standard error; absent when no replication produced one.
    pub mean_se: Option<f64>,
    pub n_ok: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub design: McDesign,
    pub cells: Vec<McCell>,
    pub failure_count: usize,
    pub failures_by_t: Vec<(usize, usize)>,
    pub flagged: bool,
}

/// Outcome of one replication.
#[derive(Debug, Clone)]
pub struct Replication {
    pub t: usize,
    pub k: usize,
    pub seed: u64,
    pub fit: Result<FitResult>,
}

impl Replication {
    pub fn ok(&self) -> Option<&FitResult> {
        self.fit.as_ref().ok().filter(|f| f.converged)
    }
}

fn replicate(design: &McDesign, t: usize, k: usize) -> Replication {
    let seed = design.seed(t, k);
    let family = design.truth.family();
    let fit = simulate(&design.truth, t, design.burn_in, seed, SimulateOptions::default())
        .and_then(|path| fit(family, &path.y, &design.fit));
    Replication { t, k, seed, fit }
}

fn check_truth(truth: &ModelSpec) -> Result<()> {
    let strict = check_strict_stationarity(truth);
    match truth.recursion() {
        Recursion::Ingarch(_) if !strict.holds => Err(Error::NonStationary(format!(
            "Monte Carlo truth must satisfy tau + phi < 1 (got {})",
            strict.margin.unwrap_or(f64::NAN)
        ))),
        _ => Ok(()),
    }
}

/// Runs every replication in `(T, k)` order and returns them in that order.
pub fn run_replications(design: &McDesign) -> Result<Vec<Replication>> {
    design.validate()?;
    check_truth(&design.truth)?;
    let jobs: Vec<(usize, usize)> = design
        .t_grid
        .iter()
        .flat_map(|&t| (0..design.n_reps).map(move |k| (t, k)))
        .collect();
    let work = || -> Vec<Replication> {
        jobs.par_iter()
            .map(|&(t, k)| replicate(design, t, k))
            .collect()
    };
    if design.workers == 0 {
        Ok(work())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(design.workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(work))
    }
}

/// Aggregates replications into per-(T, parameter) cells.
pub fn aggregate(design: &McDesign, replications: &[Replication]) -> McReport {
    let mut cells = Vec::new();
    let mut failures_by_t = Vec::new();
    for &t in &design.t_grid {
        let at_t: Vec<&Replication> = replications.iter().filter(|r| r.t == t).collect();
        let fits: Vec<&FitResult> = at_t.iter().filter_map(|r| r.ok()).collect();
        failures_by_t.push((t, at_t.len() - fits.len()));
        for name in design.report_params() {
            let truth = truth_value(&design.truth, name).expect("reported parameter");
            let values: Vec<f64> = fits.iter().filter_map(|f| f.reported(name)).collect();
            let n = values.len();
            let (mean, sd, rmse) = if n == 0 {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                let mean = values.iter().sum::<f64>() / n as f64;
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / n as f64;
                (mean, var.sqrt(), mse.sqrt())
            };
            let ses: Vec<f64> = fits.iter().filter_map(|f| f.reported_se(name)).collect();
            let mean_se = (!ses.is_empty()).then(|| ses.iter().sum::<f64>() / ses.len() as f64);
            cells.push(McCell {
                t,
                parameter: name.to_owned(),
                truth,
                mean,
                sd,
                rmse,
                mean_se,
                n_ok: n,
            });
        }
    }
    let failure_count = failures_by_t.iter().map(|&(_, f)| f).sum();
    let flagged = failures_by_t
        .iter()
        .any(|&(_, f)| f as f64 > FAILURE_FLAG_SHARE * design.n_reps as f64);
    McReport {
        design: design.clone(),
        cells,
        failure_count,
        failures_by_t,
        flagged,
    }
}

pub fn run_mc(design: &McDesign) -> Result<McReport> {
    let replications = run_replications(design)?;
    Ok(aggregate(design, &replications))
}

impl McReport {
    pub fn cell(&self, t: usize, parameter: &str) -> Option<&McCell> {
        self.cells.iter().find(|c| c.t == t && c.parameter == parameter)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,parameter,truth,mean,sd,rmse\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{},{},{}", c.t, c.parameter, c.truth, c.mean, c.sd, c.rmse);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePoint {
    pub alpha: f64,
    pub y: u64,
    pub s: f64,
}

/// BNB score ∂ln p / ∂ln λ on `y = 0..=y_max` for each α.
pub fn score_curve(alphas: &[f64], r: f64, lambda: f64, y_max: u64) -> Result<Vec<ScorePoint>> {
    crate::error::check_param("lambda", lambda, lambda > 0.0, "must be positive")?;
    let mut out = Vec::with_capacity(alphas.len() * (y_max as usize + 1));
    for &alpha in alphas {
        let law = BnbLaw::new(r, alpha)?;
        out.extend((0..=y_max).map(|y| ScorePoint {
            alpha,
            y,
            s: law.score_log_lambda(y, lambda),
        }));
    }
    Ok(out)
}

pub fn score_curve_csv(points: &[ScorePoint]) -> String {
    let mut out = String::from("alpha,y,s\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.alpha, p.y, p.s);
    }
    out
}
