//! Regression data and the joint log-posterior of `(β, ν = ln σ)`.
//!
//! The posterior is
//! `π(σ) ∏ⱼ (λⱼ/σ) gⱼ((λⱼ/σ)(βⱼ − μⱼ)) ∏ᵢ σ⁻¹ f((yᵢ − xᵢᵀβ)/σ)`, expressed in
//! `ν = ln σ` with the Jacobian `e^ν` folded in. The reduced two-parameter
//! target used in the simulation sweeps is built by [`PosteriorTarget::reduced`]
//! as an ordinary intercept-only data set, so every density goes through the
//! same code path.

use std::fmt;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::priors::{CoefficientPrior, PriorFamily};
use crate::specfun::LN_SQRT_2PI;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    y: DVector<f64>,
    x: DMatrix<f64>,
    names: Vec<String>,
    standardized: bool,
}

/// Per-column affine maps applied by [`standardize`]; `scaled = (raw − mean)/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub y_mean: f64,
    pub y_scale: f64,
    /// One entry per covariate column (the intercept is excluded).
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
}

impl Standardization {
    /// Map a coefficient of covariate `j` (1-based column index in the design,
    /// so `j ≥ 1`) from the standardized fit back to raw units.
    pub fn slope_to_raw(&self, j: usize, beta: f64) -> f64 {
        beta * self.y_scale / self.column_scales[j - 1]
    }
}

impl RegressionData {
    /// `x` must be `n × p` with a leading column of ones. `names` labels the
    /// columns of `x` (length `p`).
    pub fn new(y: Vec<f64>, x: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n == 0 || x.ncols() == 0 {
            return Err(Error::MalformedData("empty data set".into()));
        }
        if x.nrows() != n {
            return Err(Error::MalformedData(format!(
                "design has {} rows but response has {n}",
                x.nrows()
            )));
        }
        if names.len() != x.ncols() {
            return Err(Error::MalformedData("one name per design column required".into()));
        }
        if x.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::MalformedData("first design column must be the intercept (all ones)".into()));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::MalformedData("non-finite value in data".into()));
        }
        let n_obs = n;
        let p = x.ncols();
        if n_obs < p {
            return Err(Error::TooFewObservations { n: n_obs, p });
        }
        Ok(Self {
            y: DVector::from_vec(y),
            x,
            names,
            standardized: false,
        })
    }

    /// Build from a response and covariate columns; the intercept is prepended.
    pub fn from_columns(y: Vec<f64>, covariates: &[(String, Vec<f64>)]) -> Result<Self> {
        let n = y.len();
        let p = covariates.len() + 1;
        let mut x = DMatrix::from_element(n, p, 1.0);
        let mut names = vec!["intercept".to_string()];
        for (j, (name, col)) in covariates.iter().enumerate() {
            if col.len() != n {
                return Err(Error::MalformedData(format!("column `{name}` has {} values, expected {n}", col.len())));
            }
            x.set_column(j + 1, &DVector::from_column_slice(col));
            names.push(name.clone());
        }
        Self::new(y, x, names)
    }

    /// Read CSV with a header row; the column named `y` is the response and
    /// every other column is a numeric covariate.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::MalformedData(e.to_string()))?
            .clone();
        let y_idx = headers
            .iter()
            .position(|h| h == "y")
            .ok_or_else(|| Error::MalformedData("no column named `y`".into()))?;
        let mut y = Vec::new();
        let mut cols: Vec<(String, Vec<f64>)> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != y_idx)
            .map(|(_, h)| (h.to_string(), Vec::new()))
            .collect();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::MalformedData(e.to_string()))?;
            let mut k = 0;
            for (i, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::MalformedData(format!("row {}: `{field}` is not a number", row + 2))
                })?;
                if i == y_idx {
                    y.push(v);
                } else {
                    cols[k].1.push(v);
                    k += 1;
                }
            }
        }
        if y.is_empty() {
            return Err(Error::MalformedData("no data rows".into()));
        }
        Self::from_columns(y, &cols)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
    pub fn p(&self) -> usize {
        self.x.ncols()
    }
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }
    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Permute the design columns (`order[k]` is the old index of new column
    /// `k`). Column 0 must stay the intercept.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.p() || order[0] != 0 {
            return Err(Error::Domain("permutation must keep the intercept first".into()));
        }
        let x = DMatrix::from_fn(self.n(), self.p(), |i, k| self.x[(i, order[k])]);
        let names = order.iter().map(|&k| self.names[k].clone()).collect();
        Ok(Self {
            y: self.y.clone(),
            x,
            names,
            standardized: self.standardized,
        })
    }
}

fn center_scale(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ms = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, ms.sqrt())
}

/// Center every non-intercept column and the response to mean 0 and scale
/// them to mean-square 1.
pub fn standardize(data: &RegressionData) -> Result<(RegressionData, Standardization)> {
    let n = data.n();
    if n < 2 {
        return Err(Error::MalformedData("standardization needs at least two observations".into()));
    }
    let ys: Vec<f64> = data.y.iter().copied().collect();
    let (y_mean, y_scale) = center_scale(&ys);
    if !(y_scale > 0.0) || y_scale <= 1e-12 * y_mean.abs() {
        return Err(Error::DegenerateColumn("y".into()));
    }
    let mut x = data.x.clone();
    let mut column_means = Vec::new();
    let mut column_scales = Vec::new();
    for j in 1..data.p() {
        let col: Vec<f64> = data.x.column(j).iter().copied().collect();
        let (m, s) = center_scale(&col);
        if !(s > 0.0) || s <= 1e-12 * m.abs() {
            return Err(Error::DegenerateColumn(data.names[j].clone()));
        }
        for i in 0..n {
            x[(i, j)] = (col[i] - m) / s;
        }
        column_means.push(m);
        column_scales.push(s);
    }
    let y = data.y.map(|v| (v - y_mean) / y_scale);
    Ok((
        RegressionData {
            y,
            x,
            names: data.names.clone(),
            standardized: true,
        },
        Standardization {
            y_mean,
            y_scale,
            column_means,
            column_scales,
        },
    ))
}

/// Least-squares coefficients via a Cholesky solve of the normal equations.
pub fn ols_fit(data: &RegressionData) -> Result<DVector<f64>> {
    let xtx = data.x.transpose() * &data.x;
    let xty = data.x.transpose() * &data.y;
    solve_normal_equations(xtx, &xty)
}

fn solve_normal_equations(xtx: DMatrix<f64>, xty: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = xtx.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let chol = xtx.cholesky().ok_or(Error::RankDeficient)?;
    let l = chol.l();
    let dmin = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    // pivot² relative to the largest diagonal entry of XᵀX
    if dmin * dmin <= 1e-12 * scale {
        return Err(Error::RankDeficient);
    }
    Ok(chol.solve(xty))
}

/// Prior on the noise scale `σ`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaPrior {
    /// `π(σ) ∝ 1/σ`.
    Jeffreys,
    /// `σ² ~ InverseGamma(shape, scale)`.
    InverseGamma { shape: f64, scale: f64 },
    /// `σ^power · base(σ)`.
    PowerAdjusted { base: Box<SigmaPrior>, power: f64 },
}

impl SigmaPrior {
    pub fn inverse_gamma(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "inverse-gamma shape and scale must be positive, got ({shape}, {scale})"
            )));
        }
        Ok(SigmaPrior::InverseGamma { shape, scale })
    }

    /// Multiply by `σ^power`, merging with an existing adjustment.
    pub fn adjusted(self, power: f64) -> Self {
        match self {
            SigmaPrior::PowerAdjusted { base, power: k } => {
                if k + power == 0.0 {
                    *base
                } else {
                    SigmaPrior::PowerAdjusted { base, power: k + power }
                }
            }
            other if power == 0.0 => other,
            other => SigmaPrior::PowerAdjusted {
                base: Box::new(other),
                power,
            },
        }
    }

    fn base_and_power(&self) -> (&SigmaPrior, f64) {
        match self {
            SigmaPrior::PowerAdjusted { base, power } => {
                let (b, k) = base.base_and_power();
                (b, k + power)
            }
            other => (other, 0.0),
        }
    }

    /// `ln π(σ)` at `σ = e^ν` (improper priors up to a constant).
    pub fn log_density(&self, nu: f64) -> f64 {
        match self {
            SigmaPrior::Jeffreys => -nu,
            SigmaPrior::InverseGamma { shape, scale } => {
                std::f64::consts::LN_2 + shape * scale.ln() - libm::lgamma(*shape)
                    - (2.0 * shape + 1.0) * nu
                    - scale * (-2.0 * nu).exp()
            }
            SigmaPrior::PowerAdjusted { base, power } => base.log_density(nu) + power * nu,
        }
    }

    /// `d ln π(e^ν) / dν`.
    pub fn grad_log_density(&self, nu: f64) -> f64 {
        match self {
            SigmaPrior::Jeffreys => -1.0,
            SigmaPrior::InverseGamma { shape, scale } => {
                -(2.0 * shape + 1.0) + 2.0 * scale * (-2.0 * nu).exp()
            }
            SigmaPrior::PowerAdjusted { base, power } => base.grad_log_density(nu) + power,
        }
    }

    /// Whether `∫ σ^{−p} π(σ) dσ < ∞`.
    pub fn integrable_against(&self, p: usize) -> bool {
        match self.base_and_power() {
            (SigmaPrior::InverseGamma { shape, .. }, k) => k - 2.0 * shape - (p as f64) < 0.0,
            _ => false,
        }
    }
}

impl fmt::Display for SigmaPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaPrior::Jeffreys => write!(f, "jeffreys"),
            SigmaPrior::InverseGamma { shape, scale } => write!(f, "invgamma({shape},{scale})"),
            SigmaPrior::PowerAdjusted { base, power } => write!(f, "{base}*sigma^{power}"),
        }
    }
}

/// Prior on one coefficient: improper flat, or a location–scale family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaPrior {
    Flat,
    Scaled(CoefficientPrior),
}

impl BetaPrior {
    pub fn family(&self) -> Option<&PriorFamily> {
        match self {
            BetaPrior::Flat => None,
            BetaPrior::Scaled(c) => Some(c.family()),
        }
    }
}

impl fmt::Display for BetaPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaPrior::Flat => write!(f, "flat"),
            BetaPrior::Scaled(c) => write!(f, "{}[mu={},lambda={}]", c.family(), c.location(), c.precision()),
        }
    }
}

/// Conditions under which the posterior, or its limit as a prior drifts into
/// conflict, may fail to be proper.
#[derive(Debug, Clone, PartialEq)]
pub enum PropernessWarning {
    /// A CTN prior is present and neither `∫σ^{−p}π(σ)dσ < ∞` nor the
    /// Jeffreys-type sample-size condition holds.
    ImproperCtnScale { n: usize, p: usize, sigma_prior: String },
    /// The data-dominance condition `n + |Cᶜ| ≥ 2p + 1 + |C_b|` fails when every
    /// heavy-tailed location prior is treated as conflicting.
    ConflictDominance { n: usize, p: usize, non_conflicting: usize, location_conflicts: usize },
}

impl fmt::Display for PropernessWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropernessWarning::ImproperCtnScale { n, p, sigma_prior } => write!(
                f,
                "CTN prior with sigma prior {sigma_prior}: integral of sigma^-{p} pi(sigma) diverges and n = {n} <= p + 2; posterior may be improper"
            ),
            PropernessWarning::ConflictDominance { n, p, non_conflicting, location_conflicts } => write!(
                f,
                "if all {location_conflicts} heavy-tailed priors conflict, n + |C^c| = {} < 2p + 1 + |C_b| = {}; limiting posterior may be improper",
                n + non_conflicting,
                2 * p + 1 + location_conflicts
            ),
        }
    }
}

/// Normal-likelihood sufficient statistics.
#[derive(Debug, Clone, PartialEq)]
struct GaussianStats {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    yty: f64,
    /// `(β̂, RSS(β̂))` when the normal equations are solvable.
    ols: Option<(DVector<f64>, f64)>,
}

impl GaussianStats {
    fn new(data: &RegressionData) -> Self {
        let xtx = data.x.transpose() * &data.x;
        let xty = data.x.transpose() * &data.y;
        let yty = data.y.dot(&data.y);
        let ols = solve_normal_equations(xtx.clone(), &xty).ok().map(|b| {
            let r = &data.y - &data.x * &b;
            let rss = r.dot(&r);
            (b, rss)
        });
        Self { xtx, xty, yty, ols }
    }

    /// Residual sum of squares; adds `Xᵀ(y − Xβ)` times `weight` into `score`.
    fn rss_with_score(&self, beta: &[f64], score: Option<(&mut [f64], f64)>) -> f64 {
        let p = beta.len();
        let xtx = &self.xtx;
        let rss = match &self.ols {
            Some((bh, rss_min)) => {
                let mut q = 0.0;
                let mut score = score;
                for j in 0..p {
                    let mut hd = 0.0;
                    for k in 0..p {
                        hd += xtx[(j, k)] * (beta[k] - bh[k]);
                    }
                    q += (beta[j] - bh[j]) * hd;
                    if let Some((sc, w)) = score.as_mut() {
                        sc[j] -= *w * hd;
                    }
                }
                rss_min + q
            }
            None => {
                let mut q = self.yty;
                let mut score = score;
                for j in 0..p {
                    let mut hb = 0.0;
                    for k in 0..p {
                        hb += xtx[(j, k)] * beta[k];
                    }
                    q += beta[j] * hb - 2.0 * beta[j] * self.xty[j];
                    if let Some((sc, w)) = score.as_mut() {
                        sc[j] += *w * (self.xty[j] - hb);
                    }
                }
                q
            }
        };
        rss.max(0.0)
    }
}

/// Joint posterior of `(β, ν)`; immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTarget {
    data: RegressionData,
    priors: Vec<BetaPrior>,
    sigma_prior: SigmaPrior,
    error_family: PriorFamily,
    stats: GaussianStats,
    warnings: Vec<PropernessWarning>,
}

/// Coefficient prior for the reduced target; the `√n` factor is applied by
/// [`PosteriorTarget::reduced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedPrior {
    Flat,
    Informative { family: PriorFamily, location: f64, scaling: f64 },
}

impl PosteriorTarget {
    pub fn new(data: RegressionData, priors: Vec<BetaPrior>, sigma_prior: SigmaPrior) -> Result<Self> {
        Self::with_error_family(data, priors, sigma_prior, PriorFamily::Normal)
    }

    pub fn with_error_family(
        data: RegressionData,
        priors: Vec<BetaPrior>,
        sigma_prior: SigmaPrior,
        error_family: PriorFamily,
    ) -> Result<Self> {
        if priors.len() != data.p() {
            return Err(Error::Config(format!(
                "{} coefficient priors given for {} coefficients",
                priors.len(),
                data.p()
            )));
        }
        if !error_family.is_proper() {
            return Err(Error::Domain("the error distribution must be a proper density".into()));
        }
        if data.n() < data.p() {
            return Err(Error::TooFewObservations { n: data.n(), p: data.p() });
        }
        let stats = GaussianStats::new(&data);
        let mut t = Self {
            data,
            priors,
            sigma_prior,
            error_family,
            stats,
            warnings: Vec::new(),
        };
        t.warnings = t.check_properness();
        for w in &t.warnings {
            log::warn!("{w}");
        }
        Ok(t)
    }

    /// The two-parameter `(β₂, ν)` target of the simulation study: `n`
    /// standardized observations with zero least-squares estimate, so the
    /// likelihood is `σ^{−n} exp(−n(1 + β₂²)/(2σ²))`. An informative prior has
    /// scale `σ/(λ₂√n)`.
    pub fn reduced(n: usize, prior: ReducedPrior, sigma_prior: SigmaPrior) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObservations { n, p: 2 });
        }
        let data = RegressionData::new(reduced_response(n), DMatrix::from_element(n, 1, 1.0), vec!["beta_2".into()])?;
        let data = RegressionData { standardized: true, ..data };
        let bp = match prior {
            ReducedPrior::Flat => BetaPrior::Flat,
            ReducedPrior::Informative { family, location, scaling } => {
                BetaPrior::Scaled(CoefficientPrior::new(location, scaling * (n as f64).sqrt(), family)?)
            }
        };
        Self::new(data, vec![bp], sigma_prior)
    }

    fn check_properness(&self) -> Vec<PropernessWarning> {
        let (n, p) = (self.data.n(), self.data.p());
        let mut out = Vec::new();
        let has_ctn = self
            .priors
            .iter()
            .any(|b| matches!(b.family(), Some(PriorFamily::Ctn(_))));
        if has_ctn && !self.sigma_prior.integrable_against(p) {
            let ok = match self.sigma_prior.base_and_power() {
                (SigmaPrior::Jeffreys, k) => n as f64 > p as f64 + 2.0 + k.max(0.0),
                _ => false,
            };
            if !ok {
                out.push(PropernessWarning::ImproperCtnScale {
                    n,
                    p,
                    sigma_prior: self.sigma_prior.to_string(),
                });
            }
        }
        let location_conflicts = self
            .priors
            .iter()
            .filter(|b| matches!(b.family(), Some(PriorFamily::Lptn(_)) | Some(PriorFamily::Student(_))))
            .count();
        if location_conflicts > 0 {
            let non_conflicting = p - location_conflicts;
            if n + non_conflicting < 2 * p + 1 + location_conflicts {
                out.push(PropernessWarning::ConflictDominance {
                    n,
                    p,
                    non_conflicting,
                    location_conflicts,
                });
            }
        }
        out
    }

    pub fn data(&self) -> &RegressionData {
        &self.data
    }
    pub fn priors(&self) -> &[BetaPrior] {
        &self.priors
    }
    pub fn sigma_prior(&self) -> &SigmaPrior {
        &self.sigma_prior
    }
    pub fn error_family(&self) -> &PriorFamily {
        &self.error_family
    }
    pub fn warnings(&self) -> &[PropernessWarning] {
        &self.warnings
    }
    /// Number of coefficients `p`; the sampled dimension is `p + 1`.
    pub fn p(&self) -> usize {
        self.data.p()
    }
    pub fn n(&self) -> usize {
        self.data.n()
    }

    /// Least-squares estimate and `ln σ̂` with `σ̂² = RSS/n`, if available.
    pub fn ols_point(&self) -> Option<(Vec<f64>, f64)> {
        self.stats.ols.as_ref().map(|(b, rss)| {
            let s2 = (rss / self.n() as f64).max(1e-300);
            (b.iter().copied().collect(), 0.5 * s2.ln())
        })
    }

    /// Diagonal of `XᵀX`.
    pub fn design_precision(&self) -> Vec<f64> {
        self.stats.xtx.diagonal().iter().copied().collect()
    }

    /// Same data and σ prior with different coefficient priors.
    pub fn with_priors(&self, priors: Vec<BetaPrior>) -> Result<Self> {
        Self::with_error_family(self.data.clone(), priors, self.sigma_prior.clone(), self.error_family)
    }

    pub fn with_sigma_prior(&self, sigma_prior: SigmaPrior) -> Result<Self> {
        Self::with_error_family(self.data.clone(), self.priors.clone(), sigma_prior, self.error_family)
    }

    /// Unnormalized `ln π(β, ν | y)`.
    pub fn log_posterior(&self, beta: &[f64], nu: f64) -> f64 {
        self.eval(beta, nu, None)
    }

    /// Gradient with respect to `(β₁, …, β_p, ν)`.
    pub fn grad_log_posterior(&self, beta: &[f64], nu: f64) -> Vec<f64> {
        let mut g = vec![0.0; beta.len() + 1];
        self.eval(beta, nu, Some(&mut g));
        g
    }

    /// Value and gradient in one pass; `grad` has length `p + 1`.
    pub fn log_posterior_and_grad(&self, beta: &[f64], nu: f64, grad: &mut [f64]) -> f64 {
        self.eval(beta, nu, Some(grad))
    }

    /// `ln π(β, σ | y)` in σ coordinates (removes the `e^ν` Jacobian).
    pub fn log_posterior_sigma(&self, beta: &[f64], sigma: f64) -> f64 {
        let nu = sigma.ln();
        self.log_posterior(beta, nu) - nu
    }

    fn eval(&self, beta: &[f64], nu: f64, mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.p();
        debug_assert_eq!(beta.len(), p);
        let n = self.n() as f64;
        let sigma = nu.exp();
        let inv_s2 = (-2.0 * nu).exp();
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }

        // σ prior plus Jacobian of σ = e^ν
        let mut lp = self.sigma_prior.log_density(nu) + nu;
        if let Some(g) = grad.as_deref_mut() {
            g[p] += self.sigma_prior.grad_log_density(nu) + 1.0;
        }

        // likelihood
        match self.error_family {
            PriorFamily::Normal => {
                let rss = self
                    .stats
                    .rss_with_score(beta, grad.as_deref_mut().map(|g| (&mut g[..p], inv_s2)));
                lp += -n * (LN_SQRT_2PI + nu) - 0.5 * rss * inv_s2;
                if let Some(g) = grad.as_deref_mut() {
                    g[p] += -n + rss * inv_s2;
                }
            }
            fam => {
                let x = &self.data.x;
                for i in 0..self.n() {
                    let fit: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
                    let r = (self.data.y[i] - fit) / sigma;
                    lp += -nu + fam.log_density(r);
                    if let Some(g) = grad.as_deref_mut() {
                        let s = fam.grad_log_density(r);
                        for j in 0..p {
                            g[j] -= s * x[(i, j)] / sigma;
                        }
                        g[p] += -1.0 - s * r;
                    }
                }
            }
        }

        // coefficient priors
        for (j, prior) in self.priors.iter().enumerate() {
            if let BetaPrior::Scaled(c) = prior {
                let z = c.standardize(beta[j], sigma);
                let fam = c.family();
                lp += c.precision().ln() - nu + fam.log_density(z);
                if let Some(g) = grad.as_deref_mut() {
                    let s = fam.grad_log_density(z);
                    g[j] += s * c.precision() / sigma;
                    g[p] += -1.0 - s * z;
                }
            }
        }
        lp
    }
}

/// A length-`n` response with mean 0 and mean square 1.
fn reduced_response(n: usize) -> Vec<f64> {
    let mut y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    if n % 2 == 1 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        y[n - 3] = s;
        y[n - 2] = s;
        y[n - 1] = -2.0 * s;
    }
    y
}
