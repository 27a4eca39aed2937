//! Finite-grid checks of the conflict limits: pointwise prior ratios as a
//! location or scale drifts away, and marginal-likelihood ratios against the
//! limiting posterior along conflict paths.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{PosteriorTarget, ReducedPrior, SigmaPrior};
use crate::oracle::{quadrature_moments, ConflictKind, GridSpec, LimitingTarget};
use crate::priors::{derive_ctn, derive_lptn, PriorFamily};
use crate::specfun::log_normal_pdf;

/// Hyperparameters of one coefficient along a path:
/// `μ(ω) = a + bω`, `λ(ω) = c + dω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictPath {
    coefficients: Vec<PathCoefficients>,
}

impl ConflictPath {
    pub fn new(coefficients: Vec<PathCoefficients>) -> Result<Self> {
        for (j, k) in coefficients.iter().enumerate() {
            if ![k.a, k.b, k.c, k.d].iter().all(|v| v.is_finite()) {
                return Err(Error::Domain(format!("path coefficient {j} is not finite")));
            }
            if !(k.c > 0.0) || k.d < 0.0 {
                return Err(Error::Domain(format!("path coefficient {j}: need c > 0 and d >= 0")));
            }
            if k.b != 0.0 && k.d != 0.0 {
                return Err(Error::Domain(format!(
                    "path coefficient {j}: location and scale cannot both drift"
                )));
            }
        }
        Ok(Self { coefficients })
    }

    /// Single-coefficient location path `μ = a + bω`, `λ = c`.
    pub fn location(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![PathCoefficients { a, b, c, d: 0.0 }])
    }

    /// Single-coefficient scaling path `μ = a`, `λ = c + dω`.
    pub fn scaling(a: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(vec![PathCoefficients { a, b: 0.0, c, d }])
    }

    pub fn coefficients(&self) -> &[PathCoefficients] {
        &self.coefficients
    }

    pub fn mu(&self, j: usize, omega: f64) -> f64 {
        let k = self.coefficients[j];
        k.a + k.b * omega
    }

    pub fn lambda(&self, j: usize, omega: f64) -> f64 {
        let k = self.coefficients[j];
        k.c + k.d * omega
    }

    /// Indices with a drifting location.
    pub fn location_set(&self) -> Vec<usize> {
        (0..self.coefficients.len()).filter(|&j| self.coefficients[j].b != 0.0).collect()
    }

    /// Indices with a growing precision.
    pub fn scaling_set(&self) -> Vec<usize> {
        (0..self.coefficients.len()).filter(|&j| self.coefficients[j].d > 0.0).collect()
    }

    fn conflicts(&self) -> Vec<(usize, ConflictKind)> {
        let mut c: Vec<(usize, ConflictKind)> = self
            .location_set()
            .into_iter()
            .map(|j| (j, ConflictKind::Location))
            .collect();
        c.extend(self.scaling_set().into_iter().map(|j| (j, ConflictKind::Scaling)));
        c.sort_by_key(|x| x.0);
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSeries {
    pub family: String,
    pub omega: Vec<f64>,
    pub ratio: Vec<f64>,
    pub target: f64,
}

impl RatioSeries {
    fn new(family: impl Into<String>, omega: Vec<f64>, ratio: Vec<f64>, target: f64) -> Result<Self> {
        if omega.is_empty() || omega.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("grid must be nonempty and strictly increasing".into()));
        }
        Ok(Self {
            family: family.into(),
            omega,
            ratio,
            target,
        })
    }

    pub fn abs_errors(&self) -> Vec<f64> {
        self.ratio.iter().map(|r| (r - self.target).abs()).collect()
    }

    /// `|ratio − target|` at the last grid point; relative when the target is
    /// nonzero.
    pub fn terminal_error(&self) -> f64 {
        let e = self.abs_errors()[self.ratio.len() - 1];
        if self.target != 0.0 {
            e / self.target.abs()
        } else {
            e
        }
    }

    /// Whether `|ratio − target|` is nonincreasing over the last `k` points.
    pub fn tail_nonincreasing(&self, k: usize) -> bool {
        let e = self.abs_errors();
        let start = e.len().saturating_sub(k);
        e[start..].windows(2).all(|w| w[1] <= w[0])
    }

    /// As [`Self::tail_nonincreasing`], but errors below `floor` count as
    /// converged; for series computed to a finite numerical accuracy.
    pub fn tail_settled(&self, k: usize, floor: f64) -> bool {
        let e = self.abs_errors();
        let start = e.len().saturating_sub(k);
        e[start..].windows(2).all(|w| w[1] <= w[0] || w[1] < floor)
    }

    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "# family={}", self.family)?;
        writeln!(w, "omega,ratio,target,abs_err")?;
        for (o, (r, e)) in self.omega.iter().zip(self.ratio.iter().zip(self.abs_errors())) {
            writeln!(w, "{o},{r},{},{e}", self.target)?;
        }
        Ok(())
    }
}

fn check_scale(lambda: f64, sigma: f64) -> Result<()> {
    if !(lambda > 0.0 && sigma > 0.0 && lambda.is_finite() && sigma.is_finite()) {
        return Err(Error::Domain(format!("need lambda, sigma > 0, got ({lambda}, {sigma})")));
    }
    Ok(())
}

/// `ln[(λ/σ) g((λ/σ)(β − μ))]`.
fn log_scaled(fam: &PriorFamily, lambda: f64, sigma: f64, beta: f64, mu: f64) -> f64 {
    let r = lambda / sigma;
    r.ln() + fam.log_density(r * (beta - mu))
}

fn location_ratio(fam: PriorFamily, lambda: f64, sigma: f64, beta: f64, mu_grid: &[f64], target: f64) -> Result<RatioSeries> {
    check_scale(lambda, sigma)?;
    let ratio = mu_grid
        .iter()
        .map(|&mu| (log_scaled(&fam, lambda, sigma, beta, mu) - fam.log_density(mu)).exp())
        .collect();
    RatioSeries::new(fam.to_string(), mu_grid.to_vec(), ratio, target)
}

/// `(λ/σ) g((λ/σ)(β − μ)) / g(μ)` for a Student prior; limit `(σ/λ)^γ`.
pub fn prior_ratio_student(lambda: f64, sigma: f64, beta: f64, dof: f64, mu_grid: &[f64]) -> Result<RatioSeries> {
    let fam = PriorFamily::student(dof)?;
    location_ratio(fam, lambda, sigma, beta, mu_grid, (sigma / lambda).powf(dof))
}

/// Same ratio for an LPTN prior; limit 1.
pub fn prior_ratio_lptn(lambda: f64, sigma: f64, beta: f64, rho: f64, mu_grid: &[f64]) -> Result<RatioSeries> {
    location_ratio(derive_lptn(rho)?, lambda, sigma, beta, mu_grid, 1.0)
}

/// Density of an LPTN prior with growing precision, and its ratio to the
/// asymptote `φ(τ)(τ/|β − μ|)(ln τ / ln λ)^θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LptnTrace {
    /// `(λ/σ) g((λ/σ)(β − μ))`; tends to 0.
    pub density: RatioSeries,
    /// Density over the asymptote; tends to 1 at a logarithmic rate.
    pub companion: RatioSeries,
}

pub fn lptn_scaling_trace(beta: f64, mu: f64, sigma: f64, rho: f64, lambda_grid: &[f64]) -> Result<LptnTrace> {
    if beta == mu {
        return Err(Error::DegenerateInput("beta equals mu: the density grows without bound".into()));
    }
    if !(sigma > 0.0) || lambda_grid.iter().any(|&l| !(l > 1.0)) {
        return Err(Error::Domain("need sigma > 0 and lambda > 1".into()));
    }
    let fam = derive_lptn(rho)?;
    let PriorFamily::Lptn(l) = fam else { unreachable!() };
    let (tau, theta) = (l.threshold(), l.tail_exponent());
    let dist = (beta - mu).abs();
    let log_asym = |lam: f64| log_normal_pdf(tau) + tau.ln() - dist.ln() + theta * (tau.ln().ln() - lam.ln().ln());
    let logs: Vec<f64> = lambda_grid.iter().map(|&lam| log_scaled(&fam, lam, sigma, beta, mu)).collect();
    let density = RatioSeries::new(fam.to_string(), lambda_grid.to_vec(), logs.iter().map(|v| v.exp()).collect(), 0.0)?;
    let companion = RatioSeries::new(
        fam.to_string(),
        lambda_grid.to_vec(),
        logs.iter().zip(lambda_grid).map(|(v, &lam)| (v - log_asym(lam)).exp()).collect(),
        1.0,
    )?;
    Ok(LptnTrace { density, companion })
}

/// Which hyperparameter of a CTN prior drifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CtnRegime {
    /// `μ` runs over the grid with `λ` fixed.
    Location { lambda: f64 },
    /// `λ` runs over the grid with `μ` fixed.
    Scaling { mu: f64 },
}

/// `(λ/σ) g((λ/σ)(β − μ)) / ((λ/σ) φ(κ))` for a CTN prior; exactly 1 once
/// `|(λ/σ)(β − μ)| > κ`.
pub fn prior_limit_ctn(beta: f64, sigma: f64, varrho: f64, regime: CtnRegime, grid: &[f64]) -> Result<RatioSeries> {
    let fam = derive_ctn(varrho)?;
    let PriorFamily::Ctn(c) = fam else { unreachable!() };
    let log_tail = log_normal_pdf(c.threshold());
    let z_of = |w: f64| -> Result<f64> {
        match regime {
            CtnRegime::Location { lambda } => {
                check_scale(lambda, sigma)?;
                Ok(lambda / sigma * (beta - w))
            }
            CtnRegime::Scaling { mu } => {
                if mu == beta {
                    return Err(Error::DegenerateInput("beta equals mu: no scaling limit".into()));
                }
                check_scale(w, sigma)?;
                Ok(w / sigma * (beta - mu))
            }
        }
    };
    let ratio = grid
        .iter()
        .map(|&w| z_of(w).map(|z| (fam.log_density(z) - log_tail).exp()))
        .collect::<Result<Vec<f64>>>()?;
    RatioSeries::new(fam.to_string(), grid.to_vec(), ratio, 1.0)
}

/// The reduced `(β₂, ν)` target with a given coefficient family; `λ₂` along a
/// path is on the user-facing scale (multiplied by `√n` internally).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSpec {
    pub n: usize,
    pub family: PriorFamily,
    pub sigma_prior: SigmaPrior,
}

impl ReducedSpec {
    pub fn new(n: usize, family: PriorFamily) -> Self {
        Self {
            n,
            family,
            sigma_prior: SigmaPrior::Jeffreys,
        }
    }

    pub fn target(&self, mu2: f64, lambda2: f64) -> Result<PosteriorTarget> {
        PosteriorTarget::reduced(
            self.n,
            ReducedPrior::Informative {
                family: self.family,
                location: mu2,
                scaling: lambda2,
            },
            self.sigma_prior.clone(),
        )
    }

    fn check_path(&self, path: &ConflictPath) -> Result<()> {
        if path.coefficients().len() != 1 {
            return Err(Error::Domain("the reduced target has one coefficient".into()));
        }
        Ok(())
    }

    pub fn target_on_path(&self, path: &ConflictPath, omega: f64) -> Result<PosteriorTarget> {
        self.check_path(path)?;
        self.target(path.mu(0, omega), path.lambda(0, omega))
    }
}

/// `m_ω(y) / (N_ω m̄(y))` along `path`, where `N_ω` collects the per-prior
/// normalizers (`g(μ)` for LPTN, `g(μ) λ^{−γ}` for Student, `λ φ(κ)` for CTN)
/// and `m̄` is the marginal of the limiting target. Limit 1.
pub fn marginal_ratio_convergence(path: &ConflictPath, spec: &ReducedSpec, omega_grid: &[f64], grid: &GridSpec) -> Result<RatioSeries> {
    spec.check_path(path)?;
    let first = spec.target_on_path(path, omega_grid.first().copied().unwrap_or(1.0))?;
    let limiting = LimitingTarget::new(&first, &path.conflicts())?;
    let log_bar = quadrature_moments(limiting.target(), grid)?.log_normalizer;
    let ratio = omega_grid
        .par_iter()
        .map(|&w| -> Result<f64> {
            let t = spec.target_on_path(path, w)?;
            let log_m = quadrature_moments(&t, grid)?.log_normalizer;
            let log_norm = limiting.log_normalizer(t.priors())?;
            Ok((log_m - log_norm - log_bar).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    RatioSeries::new(spec.family.to_string(), omega_grid.to_vec(), ratio, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub omega: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryComparison {
    pub rows: Vec<SummaryRow>,
    /// Mean and SD of the limiting target; `None` when the family has no limit
    /// along this path.
    pub limit: Option<(f64, f64)>,
}

/// Posterior mean and SD of `β₂` along `path`, next to the limiting values.
pub fn limiting_summary_comparison(path: &ConflictPath, spec: &ReducedSpec, omega_grid: &[f64], grid: &GridSpec) -> Result<SummaryComparison> {
    spec.check_path(path)?;
    let rows = omega_grid
        .par_iter()
        .map(|&w| -> Result<SummaryRow> {
            let q = quadrature_moments(&spec.target_on_path(path, w)?, grid)?;
            Ok(SummaryRow { omega: w, mean: q.mean, sd: q.sd })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = spec.target_on_path(path, omega_grid.first().copied().unwrap_or(1.0))?;
    let conflicts = path.conflicts();
    let limit = if conflicts.is_empty() {
        None
    } else {
        match LimitingTarget::new(&first, &conflicts) {
            Ok(l) => {
                let q = quadrature_moments(l.target(), grid)?;
                Some((q.mean, q.sd))
            }
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        }
    };
    Ok(SummaryComparison { rows, limit })
}

/// Geometric grid `10^lo, 10^(lo+1), …, 10^hi`.
pub fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(k)).collect()
}

/// Grids used by [`run_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckGrids {
    /// Pointwise ratio grid (locations or precisions).
    pub pointwise: Vec<f64>,
    /// Conflict-path grid for quadrature-based ratios.
    pub quadrature: Vec<f64>,
    /// Precision grid for the LPTN scaling trace.
    pub trace: Vec<f64>,
}

impl Default for CheckGrids {
    fn default() -> Self {
        Self {
            pointwise: decades(1, 8),
            quadrature: decades(0, 4),
            trace: decades(2, 12),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub claim: String,
    pub terminal_error: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
    pub series: Vec<(String, RatioSeries)>,
}

impl CheckResult {
    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    fn failed(claim: &str, threshold: f64, e: Error) -> Self {
        Self {
            claim: claim.into(),
            terminal_error: f64::NAN,
            threshold,
            passed: false,
            detail: e.to_string(),
            series: Vec::new(),
        }
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn value_at(series: &RatioSeries, omega: f64) -> Option<f64> {
    series
        .omega
        .iter()
        .position(|&o| o == omega)
        .map(|i| series.abs_errors()[i])
}

/// Companion-ratio errors of the LPTN trace at `λ = 10⁶` and `10¹²`
/// (`|β − μ| = 0.5`, `σ = 1`, `ρ = 0.95`), rounded up; used as regression
/// thresholds.
pub const LPTN_TRACE_ERROR_1E6: f64 = 0.234;
pub const LPTN_TRACE_ERROR_1E12: f64 = 0.110;

/// Below this, marginal-ratio errors are at the quadrature's accuracy.
pub const MARGINAL_NOISE_FLOOR: f64 = 1e-7;

/// Run every limit check with the given grids. Failures of the underlying
/// computations become failed results rather than errors.
pub fn run_checks(grids: &CheckGrids, quad: &GridSpec) -> Vec<CheckResult> {
    let mut out = Vec::new();

    // Student location trace
    out.push((|| -> Result<CheckResult> {
        let mut worst: f64 = 0.0;
        let mut series = Vec::new();
        let top = *grids.pointwise.last().ok_or_else(|| Error::Config("empty pointwise grid".into()))?;
        for lam in [0.5, 1.0, 2.0] {
            for sigma in [0.5, 1.0, 2.0] {
                for dof in [1.0, 4.0, 10.0] {
                    let s = prior_ratio_student(lam, sigma, 1.0, dof, &grids.pointwise)?;
                    worst = worst.max(s.terminal_error());
                    if lam == 2.0 && sigma == 1.0 && dof == 4.0 {
                        series.push(("student_ratio".to_string(), s));
                    }
                }
            }
        }
        Ok(CheckResult {
            claim: "student_location_trace".into(),
            terminal_error: worst,
            threshold: 0.01,
            passed: worst < 0.01,
            detail: format!("max relative error to (sigma/lambda)^gamma over 27 settings at mu={top}"),
            series,
        })
    })()
    .unwrap_or_else(|e| CheckResult::failed("student_location_trace", 0.01, e)));

    // LPTN location invariance
    out.push((|| -> Result<CheckResult> {
        let s = prior_ratio_lptn(1.0, 1.0, 1.0, 0.95, &grids.pointwise)?;
        // the three decades 1e4, 1e6, 1e8 when on the grid, else its last three points
        let mut picks: Vec<f64> = [1e4, 1e6, 1e8].iter().filter_map(|&w| value_at(&s, w)).collect();
        if picks.len() < 3 {
            let e = s.abs_errors();
            picks = e[e.len().saturating_sub(3)..].to_vec();
        }
        let mono = strictly_decreasing(&picks);
        let scaled = prior_ratio_lptn(2.0, 1.0, 1.0, 0.95, &grids.pointwise)?;
        let err = s.terminal_error();
        let passed = err < 0.05 && mono && s.tail_nonincreasing(3) && scaled.tail_nonincreasing(3);
        Ok(CheckResult {
            claim: "lptn_location_invariance".into(),
            terminal_error: err,
            threshold: 0.05,
            passed,
            detail: format!(
                "|ratio-1| strictly decreasing over the checked decades: {mono}; with lambda/sigma=2 terminal error {}",
                scaled.terminal_error()
            ),
            series: vec![("lptn_ratio".into(), s), ("lptn_ratio_scaled".into(), scaled)],
        })
    })()
    .unwrap_or_else(|e| CheckResult::failed("lptn_location_invariance", 0.05, e)));

    // CTN exact attainment, both regimes
    let ctn_exact = |claim: &str, regime: CtnRegime, offset: f64| -> CheckResult {
        (|| -> Result<CheckResult> {
            let s = prior_limit_ctn(offset, 1.0, 0.98, regime, &grids.pointwise)?;
            let PriorFamily::Ctn(c) = derive_ctn(0.98)? else { unreachable!() };
            let beyond: Vec<f64> = s
                .omega
                .iter()
                .zip(s.abs_errors())
                .filter(|(&w, _)| match regime {
                    CtnRegime::Location { .. } => (offset - w).abs() > c.threshold(),
                    CtnRegime::Scaling { mu } => (w * (offset - mu)).abs() > c.threshold(),
                })
                .map(|(_, e)| e)
                .collect();
            let err = beyond.iter().copied().fold(0.0, f64::max);
            Ok(CheckResult {
                claim: claim.into(),
                terminal_error: err,
                threshold: 0.0,
                passed: !beyond.is_empty() && err == 0.0,
                detail: format!("{} grid points beyond kappa, all exactly 1", beyond.len()),
                series: vec![(claim.to_string(), s)],
            })
        })()
        .unwrap_or_else(|e| CheckResult::failed(claim, 0.0, e))
    };
    out.push(ctn_exact("ctn_location_exact", CtnRegime::Location { lambda: 1.0 }, 0.0));
    out.push(ctn_exact("ctn_scaling_exact", CtnRegime::Scaling { mu: 0.0 }, 0.5));

    // LPTN scaling trace
    out.push((|| -> Result<CheckResult> {
        let tr = lptn_scaling_trace(0.5, 0.0, 1.0, 0.95, &grids.trace)?;
        let comp = &tr.companion;
        let mono = strictly_decreasing(&comp.abs_errors());
        let err = comp.terminal_error();
        let ctn = prior_limit_ctn(0.5, 1.0, 0.98, CtnRegime::Scaling { mu: 0.0 }, &grids.trace)?;
        let slow = err > ctn.terminal_error();
        let e6 = value_at(comp, 1e6);
        let e12 = value_at(comp, 1e12);
        let pinned = e6.is_none_or(|e| e <= LPTN_TRACE_ERROR_1E6) && e12.is_none_or(|e| e <= LPTN_TRACE_ERROR_1E12);
        Ok(CheckResult {
            claim: "lptn_scaling_trace".into(),
            terminal_error: err,
            threshold: LPTN_TRACE_ERROR_1E12,
            passed: mono && slow && pinned,
            detail: format!(
                "companion error monotone: {mono}; slower than CTN: {slow}; error at 1e6: {}",
                e6.map_or("n/a".into(), |e| e.to_string())
            ),
            series: vec![("lptn_trace_density".into(), tr.density.clone()), ("lptn_trace_companion".into(), tr.companion)],
        })
    })()
    .unwrap_or_else(|e| CheckResult::failed("lptn_scaling_trace", LPTN_TRACE_ERROR_1E12, e)));

    // marginal ratios
    let n = 100;
    let marginal = |claim: &str, path: ConflictPath, family: PriorFamily, threshold: Option<f64>| -> CheckResult {
        (|| -> Result<CheckResult> {
            let spec = ReducedSpec::new(n, family);
            let s = marginal_ratio_convergence(&path, &spec, &grids.quadrature, quad)?;
            let err = s.terminal_error();
            let mono = s.tail_settled(3, MARGINAL_NOISE_FLOOR);
            let passed = mono && threshold.is_none_or(|t| err < t);
            Ok(CheckResult {
                claim: claim.into(),
                terminal_error: err,
                threshold: threshold.unwrap_or(f64::NAN),
                passed,
                detail: format!("|ratio-1| nonincreasing over last three points: {mono}"),
                series: vec![(claim.to_string(), s)],
            })
        })()
        .unwrap_or_else(|e| CheckResult::failed(claim, threshold.unwrap_or(f64::NAN), e))
    };
    let ctn98 = derive_ctn(0.98).expect("valid mass");
    let lptn95 = derive_lptn(0.95).expect("valid mass");
    let student4 = PriorFamily::student(4.0).expect("valid dof");
    out.push(marginal(
        "marginal_ratio_ctn_scaling",
        ConflictPath::scaling(0.5, 1.0, 1.0).expect("valid path"),
        ctn98,
        Some(0.02),
    ));
    out.push(marginal(
        "marginal_ratio_ctn_location",
        ConflictPath::location(0.0, 1.0, 1.0).expect("valid path"),
        ctn98,
        Some(0.02),
    ));
    out.push(marginal(
        "marginal_ratio_lptn_location",
        ConflictPath::location(0.0, 1.0, 1.0).expect("valid path"),
        lptn95,
        None,
    ));
    out.push(marginal(
        "marginal_ratio_student_location",
        ConflictPath::location(0.0, 1.0, 1.0).expect("valid path"),
        student4,
        None,
    ));

    // convergence speed of posterior summaries
    out.push((|| -> Result<CheckResult> {
        let path = ConflictPath::location(0.0, 1.0, 1.0)?;
        let w = [10.0];
        let l = limiting_summary_comparison(&path, &ReducedSpec::new(n, lptn95), &w, quad)?;
        let s = limiting_summary_comparison(&path, &ReducedSpec::new(n, student4), &w, quad)?;
        let (lm, sm) = (l.rows[0].mean.abs(), s.rows[0].mean.abs());
        Ok(CheckResult {
            claim: "lptn_faster_than_student".into(),
            terminal_error: lm,
            threshold: sm,
            passed: lm < sm,
            detail: format!("|mean| at mu2=10: lptn {lm}, student {sm}"),
            series: Vec::new(),
        })
    })()
    .unwrap_or_else(|e| CheckResult::failed("lptn_faster_than_student", f64::NAN, e)));

    out.push((|| -> Result<CheckResult> {
        let path = ConflictPath::scaling(0.5, 1.0, 1.0)?;
        let c = limiting_summary_comparison(&path, &ReducedSpec::new(n, ctn98), &[10.0], quad)?;
        let (lim, _) = c.limit.ok_or_else(|| Error::Domain("no CTN limit".into()))?;
        let err = (c.rows[0].mean - lim).abs();
        Ok(CheckResult {
            claim: "ctn_scaling_summary".into(),
            terminal_error: err,
            threshold: 0.05,
            passed: err < 0.05,
            detail: format!("mean at lambda2=11: {}, limiting mean {lim}", c.rows[0].mean),
            series: Vec::new(),
        })
    })()
    .unwrap_or_else(|e| CheckResult::failed("ctn_scaling_summary", 0.05, e)));

    out
}

/// Write the `claim,terminal_error,threshold,verdict,detail` report.
pub fn write_report<W: Write>(mut w: W, results: &[CheckResult], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "claim,terminal_error,threshold,verdict,detail")?;
    for r in results {
        let detail = r.detail.replace('"', "'");
        writeln!(w, "{},{},{},{},\"{detail}\"", r.claim, r.terminal_error, r.threshold, r.verdict())?;
    }
    Ok(())
}
