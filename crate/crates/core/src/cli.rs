//! Command-line front end: `fit`, `sweep` and `check`.
//!
//! Every command reads optional defaults from a flat TOML file (`--config`);
//! flags override file values. Output CSVs start with `#` comment lines that
//! record the resolved configuration.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure (including a failed `check` claim).

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::asymptotics::{decades, run_checks, write_report, CheckGrids};
use crate::error::{Error, Result};
use crate::model::{ols_fit, standardize, BetaPrior, PosteriorTarget, ReducedPrior, RegressionData, SigmaPrior};
use crate::oracle::{quadrature_moments, GridSpec};
use crate::priors::{derive_ctn, derive_lptn, CoefficientPrior, PriorFamily};
use crate::sampler::{sample, summarize, tuning_warnings, write_chains_csv, HmcConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Io(_) => EXIT_CONFIG,
        Error::DegenerateInput(_)
        | Error::DegenerateColumn(_)
        | Error::RankDeficient
        | Error::TooFewObservations { .. }
        | Error::MalformedData(_) => EXIT_DATA,
        Error::UndefinedVariance(_)
        | Error::ImproperPosterior(_)
        | Error::Integrability(_)
        | Error::Divergence { .. }
        | Error::EmptyChains(_) => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "robust-priors", version, about = "Heavy-tailed priors for Bayesian linear regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regression on CSV data by HMC.
    Fit(FitArgs),
    /// Posterior mean and SD of β₂ on the reduced target across a grid of μ₂ or λ₂.
    Sweep(SweepArgs),
    /// Run the conflict-limit diagnostics.
    Check(CheckArgs),
}

#[derive(Debug, Args, Default)]
pub struct HmcArgs {
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(long)]
    pub leapfrog_steps: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// TOML file with default values for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV with a `y` column and numeric covariates.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// One per covariate (the intercept is flat), or one per coefficient
    /// including the intercept: `flat` or `family[:key=value,...]` with keys
    /// `mu`, `lambda` and `gamma`/`rho`/`varrho`.
    #[arg(long = "prior")]
    pub priors: Vec<String>,
    /// `jeffreys`, `invgamma:shape=a,scale=b`, optionally with `power=k`.
    #[arg(long)]
    pub sigma_prior: Option<String>,
    /// `normal`, `student:gamma=g` or `lptn:rho=r`.
    #[arg(long)]
    pub error_family: Option<String>,
    #[command(flatten)]
    pub hmc: HmcArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Draws of every chain; defaults to `<out stem>_chains.csv`.
    #[arg(long)]
    pub chains_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `mu2` or `lambda2`.
    #[arg(long)]
    pub axis: Option<String>,
    /// Comma-separated subset of jeffreys,normal,student,lptn,ctn,ctn_corrected.
    #[arg(long)]
    pub families: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// `quad` or `hmc`.
    #[arg(long)]
    pub method: Option<String>,
    /// Fixed μ₂ for a λ₂ sweep.
    #[arg(long)]
    pub mu2: Option<f64>,
    /// Fixed λ₂ for a μ₂ sweep.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// `start:step:stop`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Hyperparameter values for one family, e.g. `student=1,4,10`; repeatable.
    #[arg(long = "hyper")]
    pub hyper: Vec<String>,
    #[command(flatten)]
    pub hmc: HmcArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `name=lo:hi` (powers of ten) or `name=v1,v2,...`, separated by `;`, for
    /// names `pointwise`, `quadrature`, `trace`.
    #[arg(long)]
    pub grids: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    data: Option<PathBuf>,
    priors: Option<Vec<String>>,
    sigma_prior: Option<String>,
    error_family: Option<String>,
    step_size: Option<f64>,
    leapfrog_steps: Option<usize>,
    samples: Option<usize>,
    warmup: Option<usize>,
    chains: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    chains_out: Option<PathBuf>,
    axis: Option<String>,
    families: Option<String>,
    n: Option<usize>,
    method: Option<String>,
    mu2: Option<f64>,
    lambda2: Option<f64>,
    grid: Option<String>,
    hyper: Option<Vec<String>>,
    grids: Option<String>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn hmc_config(args: &HmcArgs, file: &FileConfig) -> HmcConfig {
    let d = HmcConfig::default();
    HmcConfig {
        step_size: args.step_size.or(file.step_size).unwrap_or(d.step_size),
        leapfrog_steps: args.leapfrog_steps.or(file.leapfrog_steps).unwrap_or(d.leapfrog_steps),
        n_samples: args.samples.or(file.samples).unwrap_or(d.n_samples),
        n_warmup: args.warmup.or(file.warmup).unwrap_or(d.n_warmup),
        n_chains: args.chains.or(file.chains).unwrap_or(d.n_chains),
        rng_seed: args.seed.or(file.seed).unwrap_or(d.rng_seed),
        mass: None,
    }
}

fn describe_hmc(c: &HmcConfig) -> String {
    format!(
        "step_size={} leapfrog_steps={} samples={} warmup={} chains={} seed={}",
        c.step_size, c.leapfrog_steps, c.n_samples, c.n_warmup, c.n_chains, c.rng_seed
    )
}

/// `tag[:key=value,...]` split into the tag and its key/value pairs.
fn split_spec(spec: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (tag, rest) = match spec.split_once(':') {
        Some((t, r)) => (t, r),
        None => (spec, ""),
    };
    let mut kv = Vec::new();
    for part in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("`{part}` in `{spec}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("`{v}` in `{spec}` is not a number")))?;
        kv.push((k.trim().to_string(), v));
    }
    Ok((tag.trim().to_ascii_lowercase(), kv))
}

fn take(kv: &mut Vec<(String, f64)>, keys: &[&str]) -> Option<f64> {
    let i = kv.iter().position(|(k, _)| keys.contains(&k.as_str()))?;
    Some(kv.remove(i).1)
}

fn reject_rest(kv: &[(String, f64)], spec: &str) -> Result<()> {
    match kv.first() {
        Some((k, _)) => Err(Error::Config(format!("unknown key `{k}` in `{spec}`"))),
        None => Ok(()),
    }
}

pub const DEFAULT_GAMMA: f64 = 4.0;
pub const DEFAULT_RHO: f64 = 0.95;
pub const DEFAULT_VARRHO: f64 = 0.98;

fn family_from(tag: &str, kv: &mut Vec<(String, f64)>, spec: &str) -> Result<PriorFamily> {
    match tag {
        "normal" => Ok(PriorFamily::Normal),
        "student" => PriorFamily::student(take(kv, &["gamma", "dof"]).unwrap_or(DEFAULT_GAMMA)),
        "lptn" => derive_lptn(take(kv, &["rho"]).unwrap_or(DEFAULT_RHO)),
        "ctn" => derive_ctn(take(kv, &["varrho", "rho"]).unwrap_or(DEFAULT_VARRHO)),
        other => Err(Error::Config(format!("unknown family `{other}` in `{spec}`"))),
    }
}

/// A coefficient prior as given on the command line; `λ` is on the
/// user-facing scale and is multiplied by `√n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub family: Option<PriorFamily>,
    pub mu: f64,
    pub lambda: f64,
}

impl PriorSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let (tag, mut kv) = split_spec(spec)?;
        if tag == "flat" {
            reject_rest(&kv, spec)?;
            return Ok(Self { family: None, mu: 0.0, lambda: 1.0 });
        }
        let family = family_from(&tag, &mut kv, spec)?;
        let mu = take(&mut kv, &["mu"]).unwrap_or(0.0);
        let lambda = take(&mut kv, &["lambda"]).unwrap_or(1.0);
        reject_rest(&kv, spec)?;
        if !mu.is_finite() || !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("`{spec}`: need finite mu and lambda > 0")));
        }
        Ok(Self { family: Some(family), mu, lambda })
    }

    fn to_prior(&self, n: usize) -> Result<BetaPrior> {
        match self.family {
            None => Ok(BetaPrior::Flat),
            Some(f) => Ok(BetaPrior::Scaled(CoefficientPrior::new(self.mu, self.lambda * (n as f64).sqrt(), f)?)),
        }
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            None => write!(f, "flat"),
            Some(fam) => write!(f, "{fam}(mu={},lambda={})", self.mu, self.lambda),
        }
    }
}

pub fn parse_sigma_prior(spec: &str) -> Result<SigmaPrior> {
    let (tag, mut kv) = split_spec(spec)?;
    let base = match tag.as_str() {
        "jeffreys" => SigmaPrior::Jeffreys,
        "invgamma" | "inverse_gamma" => {
            let shape = take(&mut kv, &["shape"]).ok_or_else(|| Error::Config(format!("`{spec}` needs shape")))?;
            let scale = take(&mut kv, &["scale"]).ok_or_else(|| Error::Config(format!("`{spec}` needs scale")))?;
            SigmaPrior::inverse_gamma(shape, scale)?
        }
        other => return Err(Error::Config(format!("unknown sigma prior `{other}`"))),
    };
    let power = take(&mut kv, &["power"]).unwrap_or(0.0);
    reject_rest(&kv, spec)?;
    if !power.is_finite() {
        return Err(Error::Config(format!("`{spec}`: power must be finite")));
    }
    Ok(base.adjusted(power))
}

pub fn parse_error_family(spec: &str) -> Result<PriorFamily> {
    let (tag, mut kv) = split_spec(spec)?;
    if tag == "ctn" {
        return Err(Error::Config("the error distribution must be proper; ctn is not".into()));
    }
    let f = family_from(&tag, &mut kv, spec)?;
    reject_rest(&kv, spec)?;
    Ok(f)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn header(command: &str) -> String {
    format!("robust-priors {} {command}", env!("CARGO_PKG_VERSION"))
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let file = load_file_config(args.config.as_deref())?;
    let data_path = args
        .data
        .clone()
        .or(file.data.clone())
        .ok_or_else(|| Error::Config("fit needs --data".into()))?;
    let out = args
        .out
        .clone()
        .or(file.out.clone())
        .ok_or_else(|| Error::Config("fit needs --out".into()))?;
    if !data_path.is_file() {
        return Err(Error::Config(format!("data file {} does not exist", data_path.display())));
    }
    let prior_specs: Vec<String> = if args.priors.is_empty() {
        file.priors.clone().unwrap_or_default()
    } else {
        args.priors.clone()
    };
    let mut priors = prior_specs.iter().map(|s| PriorSpec::parse(s)).collect::<Result<Vec<_>>>()?;
    let sigma_spec = args.sigma_prior.clone().or(file.sigma_prior.clone()).unwrap_or_else(|| "jeffreys".into());
    let sigma_prior = parse_sigma_prior(&sigma_spec)?;
    let error_spec = args.error_family.clone().or(file.error_family.clone()).unwrap_or_else(|| "normal".into());
    let error_family = parse_error_family(&error_spec)?;
    let hmc = hmc_config(&args.hmc, &file);
    let chains_out = args
        .chains_out
        .clone()
        .or(file.chains_out.clone())
        .unwrap_or_else(|| sibling(&out, "_chains.csv"));

    let raw = RegressionData::from_csv_path(&data_path)?;
    let (data, st) = standardize(&raw)?;
    ols_fit(&data)?;
    let (n, p) = (data.n(), data.p());
    let flat = PriorSpec { family: None, mu: 0.0, lambda: 1.0 };
    if priors.is_empty() {
        priors = vec![flat; p];
    } else if priors.len() + 1 == p {
        priors.insert(0, flat);
    } else if priors.len() != p {
        return Err(Error::Config(format!(
            "{} priors given for {} covariates (intercept included: {p})",
            priors.len(),
            p - 1
        )));
    }
    let beta_priors = priors.iter().map(|s| s.to_prior(n)).collect::<Result<Vec<_>>>()?;
    let target = PosteriorTarget::with_error_family(data, beta_priors, sigma_prior.clone(), error_family)?;

    let chains = sample(&target, &hmc)?;
    let summary = summarize(&chains)?;

    let mut comments = vec![
        header("fit"),
        format!(
            "config: data={} priors=[{}] sigma_prior={sigma_prior} error_family={error_family} {} out={} chains_out={}",
            data_path.display(),
            priors.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
            describe_hmc(&hmc),
            out.display(),
            chains_out.display()
        ),
        format!("columns: {}", target.data().names().join(",")),
        "coefficients are on the standardized scale; prior precision is lambda*sqrt(n)".into(),
        format!(
            "standardization: y_mean={} y_scale={} column_means=[{}] column_scales=[{}]",
            st.y_mean,
            st.y_scale,
            st.column_means.iter().map(ToString::to_string).collect::<Vec<_>>().join(";"),
            st.column_scales.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
        ),
    ];
    comments.extend(target.warnings().iter().map(|w| format!("warning: {w}")));
    for w in tuning_warnings(&chains) {
        log::warn!("{w}");
        comments.push(format!("warning: {w}"));
    }
    let mut w = create(&out)?;
    summary.write_csv(&mut w, &comments)?;
    w.flush()?;
    let mut w = create(&chains_out)?;
    write_chains_csv(&mut w, &chains, &comments)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Mu2,
    Lambda2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    Quad,
    Hmc,
}

pub const SWEEP_FAMILIES: [&str; 6] = ["jeffreys", "normal", "student", "lptn", "ctn", "ctn_corrected"];

/// `start:step:stop` rounded to 12 decimals; `stop` is always the last point
/// even when it is off the step lattice.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let bad = || Error::Config(format!("grid `{spec}` is not start:step:stop"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|s| s.parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (start, step, stop) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Config(format!("grid `{spec}` is empty")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let mut grid: Vec<f64> = (0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect();
    if stop - grid[count - 1] > 1e-9 * step {
        grid.push(stop);
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu2: f64,
    pub lambda2: f64,
    pub family: String,
    pub hyper: Option<f64>,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    pub families: Vec<String>,
    pub n: usize,
    pub method: SweepMethod,
    pub mu2: f64,
    pub lambda2: f64,
    pub grid: Vec<f64>,
    pub hyper: Vec<(String, Vec<f64>)>,
    pub hmc: HmcConfig,
}

impl SweepPlan {
    fn hypers(&self, family: &str) -> Vec<Option<f64>> {
        let lookup = |tag: &str| self.hyper.iter().find(|(f, _)| f == tag).map(|(_, v)| v.clone());
        let defaults = match family {
            "student" => vec![DEFAULT_GAMMA],
            "lptn" => vec![DEFAULT_RHO],
            "ctn" | "ctn_corrected" => vec![DEFAULT_VARRHO],
            _ => return vec![None],
        };
        let given = lookup(family).or_else(|| if family == "ctn_corrected" { lookup("ctn") } else { None });
        given.unwrap_or(defaults).into_iter().map(Some).collect()
    }

    fn target(&self, family: &str, hyper: Option<f64>, mu2: f64, lambda2: f64) -> Result<PosteriorTarget> {
        let informative = |f: PriorFamily| ReducedPrior::Informative { family: f, location: mu2, scaling: lambda2 };
        let h = || hyper.expect("family has a hyperparameter");
        let (prior, sigma) = match family {
            "jeffreys" => (ReducedPrior::Flat, SigmaPrior::Jeffreys),
            "normal" => (informative(PriorFamily::Normal), SigmaPrior::Jeffreys),
            "student" => (informative(PriorFamily::student(h())?), SigmaPrior::Jeffreys),
            "lptn" => (informative(derive_lptn(h())?), SigmaPrior::Jeffreys),
            "ctn" => (informative(derive_ctn(h())?), SigmaPrior::Jeffreys),
            "ctn_corrected" => (informative(derive_ctn(h())?), SigmaPrior::Jeffreys.adjusted(1.0)),
            other => return Err(Error::Config(format!("unknown family `{other}`"))),
        };
        PosteriorTarget::reduced(self.n, prior, sigma)
    }

    /// Evaluate every (grid point, family, hyperparameter) in parallel; rows
    /// come back in grid order, then family order.
    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let mut jobs = Vec::new();
        for &v in &self.grid {
            for fam in &self.families {
                for h in self.hypers(fam) {
                    jobs.push((v, fam.clone(), h));
                }
            }
        }
        jobs.par_iter()
            .enumerate()
            .map(|(i, (v, fam, h))| {
                let (mu2, lambda2) = match self.axis {
                    SweepAxis::Mu2 => (*v, self.lambda2),
                    SweepAxis::Lambda2 => (self.mu2, *v),
                };
                let t = self.target(fam, *h, mu2, lambda2)?;
                let (mean, sd) = match self.method {
                    SweepMethod::Quad => {
                        let q = quadrature_moments(&t, &GridSpec::default())?;
                        (q.mean, q.sd)
                    }
                    SweepMethod::Hmc => {
                        let cfg = HmcConfig {
                            rng_seed: self.hmc.rng_seed.wrapping_add(i as u64),
                            ..self.hmc.clone()
                        };
                        let chains = sample(&t, &cfg)?;
                        let s = summarize(&chains)?;
                        let b = s.get("beta_1").expect("reduced target has beta_1");
                        (b.mean, b.sd)
                    }
                };
                Ok(SweepRow {
                    mu2,
                    lambda2,
                    family: fam.clone(),
                    hyper: *h,
                    mean,
                    sd,
                })
            })
            .collect()
    }

    fn describe(&self) -> String {
        let axis = match self.axis {
            SweepAxis::Mu2 => format!("axis=mu2 lambda2={}", self.lambda2),
            SweepAxis::Lambda2 => format!("axis=lambda2 mu2={}", self.mu2),
        };
        let method = match self.method {
            SweepMethod::Quad => "method=quad".to_string(),
            SweepMethod::Hmc => format!("method=hmc {}", describe_hmc(&self.hmc)),
        };
        let hyper = self
            .hyper
            .iter()
            .map(|(f, v)| format!("{f}={}", v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "config: {axis} n={} families={} {method} grid=[{}] hyper=[{hyper}]",
            self.n,
            self.families.join(","),
            self.grid.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        )
    }
}

pub fn write_sweep<W: Write>(mut w: W, plan: &SweepPlan, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "# {}", header("sweep"))?;
    writeln!(w, "# {}", plan.describe())?;
    writeln!(
        w,
        "# reduced target: n standardized observations with zero least-squares estimate; prior precision is lambda2*sqrt(n); sigma prior Jeffreys (ctn_corrected: sigma times Jeffreys)"
    )?;
    writeln!(w, "mu2,lambda2,family,hyper,mean,sd")?;
    for r in rows {
        let h = r.hyper.map(|h| h.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{h},{},{}", r.mu2, r.lambda2, r.family, r.mean, r.sd)?;
    }
    Ok(())
}

pub fn sweep_plan(args: &SweepArgs) -> Result<(SweepPlan, PathBuf)> {
    let file = load_file_config(args.config.as_deref())?;
    let axis = match args.axis.clone().or(file.axis.clone()).as_deref() {
        Some("mu2") => SweepAxis::Mu2,
        Some("lambda2") => SweepAxis::Lambda2,
        Some(other) => return Err(Error::Config(format!("unknown axis `{other}`; use mu2 or lambda2"))),
        None => return Err(Error::Config("sweep needs --axis".into())),
    };
    let families_spec = args.families.clone().or(file.families.clone()).unwrap_or_else(|| SWEEP_FAMILIES.join(","));
    let families: Vec<String> = families_spec
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .filter(|s| !s.is_empty())
        .collect();
    if families.is_empty() {
        return Err(Error::Config("no families given".into()));
    }
    if let Some(f) = families.iter().find(|f| !SWEEP_FAMILIES.contains(&f.as_str())) {
        return Err(Error::Config(format!("unknown family `{f}`; choose from {}", SWEEP_FAMILIES.join(","))));
    }
    let method = match args.method.clone().or(file.method.clone()).as_deref() {
        None | Some("quad") => SweepMethod::Quad,
        Some("hmc") => SweepMethod::Hmc,
        Some(other) => return Err(Error::Config(format!("unknown method `{other}`; use quad or hmc"))),
    };
    let default_grid = match axis {
        SweepAxis::Mu2 => "0:0.05:2",
        SweepAxis::Lambda2 => "0.02:0.04:2",
    };
    let grid = parse_range(&args.grid.clone().or(file.grid.clone()).unwrap_or_else(|| default_grid.into()))?;
    let hyper_specs = if args.hyper.is_empty() { file.hyper.clone().unwrap_or_default() } else { args.hyper.clone() };
    let mut hyper = Vec::new();
    for h in &hyper_specs {
        let (fam, vals) = h
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("`{h}` is not family=v1,v2,...")))?;
        let fam = fam.trim().to_ascii_lowercase();
        if !["student", "lptn", "ctn", "ctn_corrected"].contains(&fam.as_str()) {
            return Err(Error::Config(format!("family `{fam}` has no hyperparameter")));
        }
        let vals: Vec<f64> = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{v}` in `{h}` is not a number"))))
            .collect::<Result<_>>()?;
        if vals.is_empty() {
            return Err(Error::Config(format!("`{h}` lists no values")));
        }
        hyper.push((fam, vals));
    }
    let plan = SweepPlan {
        axis,
        families,
        n: args.n.or(file.n).unwrap_or(100),
        method,
        mu2: args.mu2.or(file.mu2).unwrap_or(0.5),
        lambda2: args.lambda2.or(file.lambda2).unwrap_or(1.0),
        grid,
        hyper,
        hmc: hmc_config(&args.hmc, &file),
    };
    if plan.n < 4 {
        return Err(Error::Config(format!("n must be at least 4, got {}", plan.n)));
    }
    // validate every hyperparameter before any work
    for f in &plan.families {
        for h in plan.hypers(f) {
            plan.target(f, h, plan.mu2, plan.lambda2.max(f64::MIN_POSITIVE)).map_err(|e| match e {
                Error::Domain(m) => Error::Config(m),
                other => other,
            })?;
        }
    }
    if plan.method == SweepMethod::Hmc {
        plan.hmc.validate(2)?;
    }
    let out = args
        .out
        .clone()
        .or(file.out.clone())
        .ok_or_else(|| Error::Config("sweep needs --out".into()))?;
    Ok((plan, out))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let (plan, out) = sweep_plan(args)?;
    let rows = plan.run()?;
    let mut w = create(&out)?;
    write_sweep(&mut w, &plan, &rows)?;
    w.flush()?;
    Ok(())
}

pub fn parse_grids(spec: &str) -> Result<CheckGrids> {
    let mut g = CheckGrids::default();
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, vals) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("`{part}` is not name=values")))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{s}` in `{part}` is not a number")));
        let grid = if let Some((lo, hi)) = vals.split_once(':') {
            let (lo, hi) = (num(lo)?.log10(), num(hi)?.log10());
            if lo.fract() != 0.0 || hi.fract() != 0.0 || hi < lo {
                return Err(Error::Config(format!("`{part}`: range ends must be increasing powers of ten")));
            }
            decades(lo as i32, hi as i32)
        } else {
            vals.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(format!("`{part}`: grid must be nonempty and increasing")));
        }
        match name.trim() {
            "pointwise" => g.pointwise = grid,
            "quadrature" => g.quadrature = grid,
            "trace" => {
                if grid.iter().any(|&l| l <= 1.0) {
                    return Err(Error::Config("trace grid values must exceed 1".into()));
                }
                g.trace = grid
            }
            other => return Err(Error::Config(format!("unknown grid `{other}`"))),
        }
    }
    Ok(g)
}

fn join(v: &[f64]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Returns whether every claim passed.
pub fn cmd_check(args: &CheckArgs) -> Result<bool> {
    let file = load_file_config(args.config.as_deref())?;
    let grids = match args.grids.clone().or(file.grids.clone()) {
        Some(s) => parse_grids(&s)?,
        None => CheckGrids::default(),
    };
    let out = args
        .out
        .clone()
        .or(file.out.clone())
        .ok_or_else(|| Error::Config("check needs --out".into()))?;
    let results = run_checks(&grids, &GridSpec::default());
    let comments = vec![
        header("check"),
        format!(
            "config: pointwise=[{}] quadrature=[{}] trace=[{}] out={}",
            join(&grids.pointwise),
            join(&grids.quadrature),
            join(&grids.trace),
            out.display()
        ),
    ];
    let mut w = create(&out)?;
    write_report(&mut w, &results, &comments)?;
    w.flush()?;
    let dir = sibling(&out, "_series");
    for r in &results {
        for (name, s) in &r.series {
            let mut w = create(&dir.join(format!("{name}.csv")))?;
            s.write_csv(&mut w, &comments)?;
            w.flush()?;
        }
    }
    for r in results.iter().filter(|r| !r.passed) {
        log::error!("{} failed: {}", r.claim, r.detail);
    }
    Ok(results.iter().all(|r| r.passed))
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NUMERICAL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_specs() {
        let p = PriorSpec::parse("lptn:rho=0.9,mu=2,lambda=0.5").unwrap();
        assert_eq!(p.mu, 2.0);
        assert_eq!(p.lambda, 0.5);
        assert_eq!(p.family, Some(derive_lptn(0.9).unwrap()));
        assert_eq!(PriorSpec::parse("student").unwrap().family, Some(PriorFamily::student(4.0).unwrap()));
        assert_eq!(PriorSpec::parse("flat").unwrap().family, None);
        assert!(PriorSpec::parse("cauchy").is_err());
        assert!(PriorSpec::parse("normal:sigma=1").is_err());
        assert!(PriorSpec::parse("normal:lambda=0").is_err());
        assert!(PriorSpec::parse("lptn:rho=1.5").is_err());
    }

    #[test]
    fn sigma_specs() {
        assert_eq!(parse_sigma_prior("jeffreys").unwrap(), SigmaPrior::Jeffreys);
        assert_eq!(parse_sigma_prior("jeffreys:power=1").unwrap(), SigmaPrior::Jeffreys.adjusted(1.0));
        assert_eq!(
            parse_sigma_prior("invgamma:shape=2,scale=3").unwrap(),
            SigmaPrior::InverseGamma { shape: 2.0, scale: 3.0 }
        );
        assert!(parse_sigma_prior("invgamma:shape=2").is_err());
        assert!(parse_error_family("ctn").is_err());
        assert_eq!(parse_error_family("normal").unwrap(), PriorFamily::Normal);
    }

    #[test]
    fn ranges() {
        let g = parse_range("0:0.05:2").unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[3], 0.15);
        assert_eq!(*g.last().unwrap(), 2.0);
        let g = parse_range("0.02:0.04:2").unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 0.02);
        assert_eq!(g[49], 1.98);
        assert_eq!(g[50], 2.0);
        assert!(parse_range("1:0:2").is_err());
        assert!(parse_range("2:1:1").is_err());
        assert!(parse_range("1:2").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grids("pointwise=1e2:1e5; quadrature=1,10").unwrap();
        assert_eq!(g.pointwise, vec![1e2, 1e3, 1e4, 1e5]);
        assert_eq!(g.quadrature, vec![1.0, 10.0]);
        assert_eq!(g.trace, CheckGrids::default().trace);
        assert!(parse_grids("pointwise=3:1e5").is_err());
        assert!(parse_grids("bogus=1,2").is_err());
        assert!(parse_grids("trace=1,10").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config(String::new())), 2);
        assert_eq!(exit_code(&Error::RankDeficient), 3);
        assert_eq!(exit_code(&Error::DegenerateColumn("x".into())), 3);
        assert_eq!(exit_code(&Error::TooFewObservations { n: 1, p: 2 }), 3);
        assert_eq!(exit_code(&Error::MalformedData(String::new())), 3);
        assert_eq!(exit_code(&Error::Integrability(String::new())), 4);
        assert_eq!(run(["robust-priors", "sweep", "--axis", "sideways", "--out", "x.csv"]), 2);
        assert_eq!(run(["robust-priors", "frobnicate"]), 2);
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        fs::write(&p, "axis = \"mu2\"\nbogus = 1\n").unwrap();
        assert!(matches!(load_file_config(Some(&p)), Err(Error::Config(_))));
        fs::write(&p, "axis = \"mu2\"\nn = 50\nhyper = [\"student=1,4\"]\n").unwrap();
        let c = load_file_config(Some(&p)).unwrap();
        assert_eq!(c.n, Some(50));
    }
}
