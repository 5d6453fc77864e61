//! Command-line front end for `bnbar`.
//!
//! Every artifact embeds the configuration that produced it: CSV files open
//! with `#` lines, JSON files carry a `config` object. Exit codes are 0 on
//! success, 1 for input errors, 2 for refused non-stationary specifications
//! and 3 for numerical failures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bnbar::montecarlo::score_curve_csv;
use bnbar::{
    check_strict_stationarity, check_weak_stationarity, compare, fit, fit_all, inject_outliers, run_mc, score_curve,
    simulate, DistFamily, DynFamily, Family, FitOptions, FitResult, GasParams, IngarchParams, McDesign, ModelSpec,
    Recursion, Shape, SimulateOptions,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub mod series;

pub use series::parse_series;
use series::{echo_header, write_columns};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Refused(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Refused(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<bnbar::Error> for CliError {
    fn from(e: bnbar::Error) -> Self {
        use bnbar::Error as E;
        match e {
            E::NonStationary(_) => CliError::Refused(e.to_string()),
            E::FilterFailure { .. } | E::Truncation { .. } => CliError::Numerical(e.to_string()),
            E::InvalidParameter { .. } | E::MomentUndefined { .. } | E::InvalidInput(_) => CliError::Input(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bnbar", version, about = "Beta-negative-binomial autoregressions for count series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path and write it as `t,y,lambda` CSV.
    Simulate(SimulateArgs),
    /// Fit one family, or all four with `--compare all`.
    Fit(FitArgs),
    /// Run a Monte Carlo recovery study.
    Mc(McArgs),
    /// Emit the score s(y) on a grid of counts for several tail indices.
    ScoreCurve(ScoreCurveArgs),
    /// Report the stationarity conditions of a specification.
    Check(SpecArgs),
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: bnbar::Error| e.to_string())
}

/// Model specification. Give either `--delta` or `--omega`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SpecArgs {
    /// bnb-ingarch, bnb-gas, nb-ingarch or nb-gas
    #[arg(long, value_parser = parse_family)]
    pub model: Family,
    /// Long-run mean level; omega is derived from it
    #[arg(long, allow_negative_numbers = true, conflicts_with = "omega", required_unless_present = "omega")]
    pub delta: Option<f64>,
    /// Recursion intercept
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: f64,
    /// Dispersion r > 0
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Tail index alpha > 1 (BNB families only)
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

impl SpecArgs {
    pub fn spec(&self) -> Result<ModelSpec> {
        let alpha = match (self.model.dist, self.alpha) {
            (DistFamily::Bnb, None) => return Err(CliError::Input(format!("--alpha is required for {}", self.model))),
            (DistFamily::Nb, Some(_)) => return Err(CliError::Input(format!("--alpha does not apply to {}", self.model))),
            (_, alpha) => alpha,
        };
        let recursion = match (self.model.dynamics, self.delta, self.omega) {
            (DynFamily::Ingarch, Some(d), _) => Recursion::Ingarch(IngarchParams::from_delta(d, self.phi, self.tau)?),
            (DynFamily::Ingarch, None, Some(w)) => Recursion::Ingarch(IngarchParams::new(w, self.phi, self.tau)?),
            (DynFamily::Gas, Some(d), _) => Recursion::Gas(GasParams::from_delta(d, self.phi, self.tau)?),
            (DynFamily::Gas, None, Some(w)) => Recursion::Gas(GasParams::new(w, self.phi, self.tau)?),
            (_, None, None) => return Err(CliError::Input("one of --delta or --omega is required".into())),
        };
        Ok(ModelSpec::new(Shape { r: self.r, alpha }, recursion)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// Number of observations kept
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub len: usize,
    #[arg(long, default_value_t = bnbar::simulation::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long)]
    pub seed: u64,
    /// Replace y at these 0-based positions with outliers
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outliers: Vec<usize>,
    /// Outlier value as a multiple of the clean sample mean
    #[arg(long, default_value_t = 15.0)]
    pub outlier_scale: f64,
    /// Simulate even when tau + phi >= 1
    #[arg(long)]
    pub allow_nonstationary: bool,
    /// CSV path (stdout if absent); metadata goes to <out>.meta.json
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Series CSV: `t,y` header or a single column of counts
    pub input: PathBuf,
    /// Family to fit
    #[arg(long, value_parser = parse_family, required_unless_present = "compare")]
    pub model: Option<Family>,
    /// Fit all four families and print the AIC ranking
    #[arg(long, value_parser = ["all"], conflicts_with = "model")]
    pub compare: Option<String>,
    /// Jittered optimiser restarts
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Initial lambda of the filter (default: sample mean)
    #[arg(long)]
    pub lambda_init: Option<f64>,
    /// JSON report path (stdout if absent and not comparing)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Write the filtered path as `t,y,lambda_hat` CSV (best model when comparing)
    #[arg(long)]
    #[serde(skip)]
    pub lambda_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// Sample sizes, comma separated
    #[arg(long = "T", value_delimiter = ',', default_value = "250,500,1000")]
    #[serde(rename = "T")]
    pub t_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = bnbar::simulation::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Worker threads (0: all cores); does not change the output
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    /// CSV path (stdout if absent)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Full JSON report path
    #[arg(long)]
    #[serde(skip)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreCurveArgs {
    /// Tail indices, comma separated
    #[arg(long, value_delimiter = ',', default_value = "3,5,20")]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub r: f64,
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 500)]
    pub y_max: u64,
    /// CSV path (stdout if absent)
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn config<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialise")
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialise");
    s.push('\n');
    s
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Mc(a) => cmd_mc(&a),
        Command::ScoreCurve(a) => cmd_score_curve(&a),
        Command::Check(a) => cmd_check(&a),
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let spec = a.spec.spec()?;
    let options = SimulateOptions {
        allow_nonstationary: a.allow_nonstationary,
    };
    let mut path = simulate(&spec, a.len, a.burn_in, a.seed, options)?;
    if !a.outliers.is_empty() {
        let value = (a.outlier_scale * path.sample_mean()).round() as u64;
        path = inject_outliers(&path, &a.outliers, &vec![value; a.outliers.len()])?;
    }
    let cfg = config(a);
    let csv = echo_header("simulate", &cfg) + &write_columns("t,y,lambda", &path.y, &path.lambda);
    emit(a.out.as_deref(), &csv)?;
    for w in &path.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(out) = &a.out {
        let meta = json!({
            "config": cfg,
            "spec": spec,
            "delta": spec.delta(),
            "n": path.len(),
            "sample_mean": path.sample_mean(),
            "stationarity": path.stationarity,
            "injections": path.injections,
            "clamp_hits": path.clamp_hits,
            "warnings": path.warnings,
        });
        emit(Some(&out.with_extension("meta.json")), &pretty(&meta))?;
    }
    Ok(())
}

fn read_series(path: &Path) -> Result<Vec<u64>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_series(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cell(value: f64, se: Option<f64>) -> String {
    match se {
        Some(se) => format!("{value:.3} ({se:.3})"),
        None => format!("{value:.3} (-)"),
    }
}

/// One row per model in AIC order, estimates with standard errors in brackets.
pub fn ranking_table(fits: &[FitResult]) -> Result<String> {
    let ranked = compare(fits)?;
    let mut out = format!(
        "{:<4} {:<12} {:>18} {:>18} {:>18} {:>18} {:>18} {:>10} {:>10}\n",
        "rank", "model", "delta", "phi", "tau", "r", "alpha", "loglik", "AIC"
    );
    for row in &ranked {
        let f = fits.iter().find(|f| f.family == row.family).expect("ranked fit present");
        let get = |name| cell(f.reported(name).unwrap_or(f64::NAN), f.reported_se(name));
        let alpha = if f.family.has_alpha() { get("alpha") } else { "-".to_owned() };
        let _ = writeln!(
            out,
            "{:<4} {:<12} {:>18} {:>18} {:>18} {:>18} {:>18} {:>10.2} {:>10.2}",
            row.rank,
            row.family.to_string(),
            get("delta"),
            get("phi"),
            get("tau"),
            get("r"),
            alpha,
            f.loglik,
            f.aic
        );
    }
    Ok(out)
}

fn write_filtered(path: &Path, header: &str, fit: &FitResult, y: &[u64]) -> Result<()> {
    let filtered = fit.filtered(y)?;
    emit(Some(path), &(header.to_owned() + &write_columns("t,y,lambda_hat", y, &filtered.lambda_hat)))
}

fn unconverged(fits: &[FitResult]) -> Result<()> {
    let bad: Vec<String> = fits.iter().filter(|f| !f.converged).map(|f| f.family.to_string()).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("optimiser did not converge for {}", bad.join(", "))))
    }
}

pub fn cmd_fit(a: &FitArgs) -> Result<()> {
    let y = read_series(&a.input)?;
    let options = FitOptions {
        restarts: a.restarts,
        lambda_init: a.lambda_init,
        ..FitOptions::default()
    };
    let cfg = config(a);
    let header = echo_header("fit", &cfg);
    match a.model {
        Some(family) => {
            let f = fit(family, &y, &options)?;
            for w in &f.warnings {
                eprintln!("warning: {family}: {w}");
            }
            emit(a.out.as_deref(), &pretty(&json!({"config": cfg, "fit": f.report()})))?;
            if let Some(p) = &a.lambda_out {
                write_filtered(p, &header, &f, &y)?;
            }
            unconverged(std::slice::from_ref(&f))
        }
        None => {
            let fits = fit_all(&y, &options)?;
            let ranked = compare(&fits)?;
            print!("{}", ranking_table(&fits)?);
            if let Some(out) = &a.out {
                let reports: Vec<_> = fits.iter().map(FitResult::report).collect();
                emit(Some(out), &pretty(&json!({"config": cfg, "fits": reports, "ranking": ranked})))?;
            }
            if let Some(p) = &a.lambda_out {
                let best = fits.iter().find(|f| f.family == ranked[0].family).expect("ranked fit present");
                let header = format!("{header}# filtered = {}\n", best.family);
                write_filtered(p, &header, best, &y)?;
            }
            unconverged(&fits)
        }
    }
}

pub fn cmd_mc(a: &McArgs) -> Result<()> {
    let mut design = McDesign::new(a.spec.spec()?, a.t_grid.clone(), a.reps, a.seed)?;
    design.burn_in = a.burn_in;
    design.fit.restarts = a.restarts;
    design.workers = a.workers;
    let report = run_mc(&design)?;
    let cfg = config(a);
    emit(a.out.as_deref(), &(echo_header("mc", &cfg) + &report.to_csv()))?;
    if let Some(p) = &a.json {
        emit(Some(p), &pretty(&json!({"config": cfg, "report": report})))?;
    }
    if report.failure_count > 0 {
        eprintln!("warning: {} of {} replications failed", report.failure_count, a.reps * a.t_grid.len());
    }
    if report.flagged {
        eprintln!("warning: failure share above the reporting threshold; see failures_by_t");
    }
    Ok(())
}

pub fn cmd_score_curve(a: &ScoreCurveArgs) -> Result<()> {
    let points = score_curve(&a.alphas, a.r, a.lambda, a.y_max)?;
    emit(a.out.as_deref(), &(echo_header("score-curve", &config(a)) + &score_curve_csv(&points)))
}

pub fn cmd_check(a: &SpecArgs) -> Result<()> {
    let spec = a.spec()?;
    let report = json!({
        "config": config(a),
        "delta": spec.delta(),
        "strict": check_strict_stationarity(&spec),
        "weak": check_weak_stationarity(&spec),
    });
    emit(None, &pretty(&report))
}
