//! Standardized prior families `g` for regression coefficients and the
//! location–scale prior `π(β | σ) = (λ/σ) g((λ/σ)(β − μ))` built from them.
//!
//! Every density is evaluated in log space. Tail branches of the log-Pareto
//! and constant-tailed families never exponentiate a ratio, so arguments of
//! order 1e300 are fine.

use std::fmt;

use crate::error::{Error, Result};
use crate::specfun::{self, log_normal_pdf};

/// Student-t with `dof` degrees of freedom, fully normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Student {
    dof: f64,
    log_norm: f64,
}

impl Student {
    pub fn new(dof: f64) -> Result<Self> {
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(Error::Domain(format!(
                "student degrees of freedom must be positive and finite, got {dof}"
            )));
        }
        let log_norm = libm::lgamma(0.5 * (dof + 1.0))
            - libm::lgamma(0.5 * dof)
            - 0.5 * (dof * std::f64::consts::PI).ln();
        Ok(Self { dof, log_norm })
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    /// `ln(1 + z²/γ)` without overflowing for huge `z`.
    fn log1p_sq(&self, z: f64) -> f64 {
        let a = z.abs() / self.dof.sqrt();
        if a > 1e8 {
            2.0 * a.ln() + (1.0 / (a * a)).ln_1p()
        } else {
            (a * a).ln_1p()
        }
    }
}

/// Log-Pareto-tailed normal: `φ` on `[−τ, τ]`, `φ(τ)(τ/|z|)(ln τ/ln|z|)^θ`
/// beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lptn {
    mass: f64,
    threshold: f64,
    tail_exponent: f64,
}

impl Lptn {
    /// Lower end of the admissible central mass, `2Φ(1) − 1`.
    pub fn min_mass() -> f64 {
        2.0 * specfun::cdf_unchecked(1.0) - 1.0
    }

    /// Central mass `ρ` on which the density matches `φ`.
    pub fn mass(&self) -> f64 {
        self.mass
    }
    /// `τ = Φ⁻¹((1 + ρ)/2)`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
    /// `θ = 2(1 − ρ)⁻¹ φ(τ) τ ln τ + 1`.
    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }
}

/// Constant-tailed normal: `φ` on `[−κ, κ]` and `φ(κ)` beyond. Improper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ctn {
    mass: f64,
    threshold: f64,
}

impl Ctn {
    pub fn mass(&self) -> f64 {
        self.mass
    }
    /// `κ = Φ⁻¹((1 + ϱ)/2)`.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorFamily {
    Normal,
    Student(Student),
    Lptn(Lptn),
    Ctn(Ctn),
}

/// A standardized coordinate together with the family's log-density and its
/// derivative there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub z: f64,
    pub log_density: f64,
    pub grad_log_density: f64,
}

/// Build the LPTN family for central mass `rho ∈ (2Φ(1) − 1, 1)`.
pub fn derive_lptn(rho: f64) -> Result<PriorFamily> {
    let lo = Lptn::min_mass();
    if !(rho > lo && rho < 1.0) {
        return Err(Error::Domain(format!(
            "LPTN mass must lie in ({lo:.6}, 1), got {rho}"
        )));
    }
    let threshold = specfun::normal_inv_cdf(0.5 * (1.0 + rho))?;
    let phi_tau = specfun::normal_pdf(threshold)?;
    let tail_exponent = 2.0 / (1.0 - rho) * phi_tau * threshold * threshold.ln() + 1.0;
    Ok(PriorFamily::Lptn(Lptn {
        mass: rho,
        threshold,
        tail_exponent,
    }))
}

/// Build the CTN family for central mass `varrho ∈ (0, 1)`.
pub fn derive_ctn(varrho: f64) -> Result<PriorFamily> {
    if !(varrho > 0.0 && varrho < 1.0) {
        return Err(Error::Domain(format!(
            "CTN mass must lie in (0, 1), got {varrho}"
        )));
    }
    let threshold = specfun::normal_inv_cdf(0.5 * (1.0 + varrho))?;
    Ok(PriorFamily::Ctn(Ctn {
        mass: varrho,
        threshold,
    }))
}

impl PriorFamily {
    pub fn student(dof: f64) -> Result<Self> {
        Student::new(dof).map(PriorFamily::Student)
    }

    /// Normal, Student and LPTN integrate to one; CTN does not.
    pub fn is_proper(&self) -> bool {
        !matches!(self, PriorFamily::Ctn(_))
    }

    /// Short lowercase tag (`normal`, `student`, `lptn`, `ctn`).
    pub fn tag(&self) -> &'static str {
        match self {
            PriorFamily::Normal => "normal",
            PriorFamily::Student(_) => "student",
            PriorFamily::Lptn(_) => "lptn",
            PriorFamily::Ctn(_) => "ctn",
        }
    }

    /// The family's free hyperparameter (`γ`, `ρ` or `ϱ`), if any.
    pub fn hyperparameter(&self) -> Option<f64> {
        match self {
            PriorFamily::Normal => None,
            PriorFamily::Student(s) => Some(s.dof),
            PriorFamily::Lptn(l) => Some(l.mass),
            PriorFamily::Ctn(c) => Some(c.mass),
        }
    }

    /// `|z|` beyond which the density leaves the normal branch.
    pub fn kink(&self) -> Option<f64> {
        match self {
            PriorFamily::Lptn(l) => Some(l.threshold),
            PriorFamily::Ctn(c) => Some(c.threshold),
            _ => None,
        }
    }

    /// `ln g(z)`. Non-finite `z` yields NaN.
    pub fn log_density(&self, z: f64) -> f64 {
        match *self {
            PriorFamily::Normal => log_normal_pdf(z),
            PriorFamily::Student(s) => s.log_norm - 0.5 * (s.dof + 1.0) * s.log1p_sq(z),
            PriorFamily::Lptn(l) => {
                let a = z.abs();
                if a <= l.threshold {
                    log_normal_pdf(z)
                } else {
                    let t = l.threshold;
                    log_normal_pdf(t) + t.ln() - a.ln()
                        + l.tail_exponent * (t.ln().ln() - a.ln().ln())
                }
            }
            PriorFamily::Ctn(c) => {
                if z.abs() <= c.threshold {
                    log_normal_pdf(z)
                } else {
                    log_normal_pdf(c.threshold)
                }
            }
        }
    }

    pub fn density(&self, z: f64) -> f64 {
        self.log_density(z).exp()
    }

    /// `d ln g / dz`. At the kinks `|z| = τ, κ` the interior branch `−z` is
    /// returned.
    pub fn grad_log_density(&self, z: f64) -> f64 {
        match *self {
            PriorFamily::Normal => -z,
            PriorFamily::Student(s) => {
                let g = s.dof;
                if z.abs() > 1.0 {
                    -(g + 1.0) / (z + g / z)
                } else {
                    -(g + 1.0) * z / (g + z * z)
                }
            }
            PriorFamily::Lptn(l) => {
                if z.abs() <= l.threshold {
                    -z
                } else {
                    -1.0 / z - l.tail_exponent / (z * z.abs().ln())
                }
            }
            PriorFamily::Ctn(c) => {
                if z.abs() <= c.threshold {
                    -z
                } else {
                    0.0
                }
            }
        }
    }

    pub fn evaluate(&self, z: f64) -> Result<DensityPoint> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("density argument must be finite, got {z}")));
        }
        Ok(DensityPoint {
            z,
            log_density: self.log_density(z),
            grad_log_density: self.grad_log_density(z),
        })
    }
}

impl fmt::Display for PriorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hyperparameter() {
            Some(h) => write!(f, "{}({})", self.tag(), h),
            None => write!(f, "{}", self.tag()),
        }
    }
}

/// Location `μ`, inverse-scale multiplier `λ` and family `g` of one
/// coefficient's prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPrior {
    location: f64,
    precision: f64,
    family: PriorFamily,
}

impl CoefficientPrior {
    pub fn new(location: f64, precision: f64, family: PriorFamily) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::Domain(format!("prior location must be finite, got {location}")));
        }
        if !(precision > 0.0 && precision.is_finite()) {
            return Err(Error::Domain(format!(
                "prior scaling lambda must be positive and finite, got {precision}"
            )));
        }
        Ok(Self {
            location,
            precision,
            family,
        })
    }

    /// `μ`.
    pub fn location(&self) -> f64 {
        self.location
    }
    /// `λ`.
    pub fn precision(&self) -> f64 {
        self.precision
    }
    pub fn family(&self) -> &PriorFamily {
        &self.family
    }

    /// Standardized coordinate `(λ/σ)(β − μ)`.
    #[inline]
    pub fn standardize(&self, beta: f64, sigma: f64) -> f64 {
        self.precision / sigma * (beta - self.location)
    }
}

/// `ln[(λ/σ) g((λ/σ)(β − μ))]`.
pub fn scaled_prior_log_density(prior: &CoefficientPrior, beta: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be finite, got {beta}")));
    }
    let z = prior.standardize(beta, sigma);
    Ok((prior.precision / sigma).ln() + prior.family.log_density(z))
}
