//! Sampler-independent reference values: closed forms for the conjugate and
//! flat-prior reduced targets, inverse-gamma limits of `σ²`, limiting targets
//! under prior conflict, and nested adaptive quadrature over `(β, ν)` for
//! single-coefficient targets.

use crate::error::{Error, Result};
use crate::model::{BetaPrior, PosteriorTarget, PropernessWarning};
use crate::priors::PriorFamily;
use crate::quadrature::{integrate, Tolerance};

/// Inverse-gamma law of `σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGamma {
    pub shape: f64,
    pub scale: f64,
}

impl InverseGamma {
    pub fn mean(&self) -> Result<f64> {
        if self.shape <= 1.0 {
            return Err(Error::UndefinedVariance(format!("inverse-gamma mean needs shape > 1, got {}", self.shape)));
        }
        Ok(self.scale / (self.shape - 1.0))
    }

    pub fn variance(&self) -> Result<f64> {
        if self.shape <= 2.0 {
            return Err(Error::UndefinedVariance(format!("inverse-gamma variance needs shape > 2, got {}", self.shape)));
        }
        let a = self.shape;
        Ok(self.scale * self.scale / ((a - 1.0) * (a - 1.0) * (a - 2.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateResult {
    pub beta_mean: f64,
    pub beta_variance: f64,
    pub sigma_sq_shape: f64,
    pub sigma_sq_scale: f64,
}

impl ConjugateResult {
    pub fn sigma_sq(&self) -> InverseGamma {
        InverseGamma {
            shape: self.sigma_sq_shape,
            scale: self.sigma_sq_scale,
        }
    }
}

/// Reduced target with a normal prior of location `mu2` and scale
/// `σ/(lambda2·√n)` under the Jeffreys σ prior.
pub fn conjugate_posterior(n: usize, mu2: f64, lambda2: f64) -> Result<ConjugateResult> {
    if n <= 2 {
        return Err(Error::UndefinedVariance(format!("posterior variance needs n > 2, got n = {n}")));
    }
    if !(lambda2 > 0.0 && lambda2.is_finite() && mu2.is_finite()) {
        return Err(Error::Domain(format!("need finite mu2 and lambda2 > 0, got ({mu2}, {lambda2})")));
    }
    let l2 = lambda2 * lambda2;
    let c = 1.0 + mu2 * mu2 * l2 / (l2 + 1.0);
    let nf = n as f64;
    Ok(ConjugateResult {
        beta_mean: mu2 * l2 / (1.0 + l2),
        beta_variance: c / ((1.0 + l2) * (nf - 2.0)),
        sigma_sq_shape: nf / 2.0,
        sigma_sq_scale: nf * c / 2.0,
    })
}

/// Posterior mean and variance of `β₂` for the reduced target with flat
/// coefficient prior and Jeffreys σ prior.
pub fn jeffreys_benchmark(n: usize) -> Result<(f64, f64)> {
    if n <= 3 {
        return Err(Error::ImproperPosterior(format!("the flat-prior reduced target needs n > 3, got n = {n}")));
    }
    Ok((0.0, 1.0 / (n as f64 - 3.0)))
}

/// `σ²` law of the flat-prior reduced target.
pub fn jeffreys_sigma_posterior(n: usize) -> Result<InverseGamma> {
    sigma_law(n as f64 - 1.0, n)
}

fn sigma_law(twice_shape: f64, n: usize) -> Result<InverseGamma> {
    if !(twice_shape > 0.0) {
        return Err(Error::ImproperPosterior(format!("limiting inverse-gamma shape {} is not positive", twice_shape / 2.0)));
    }
    Ok(InverseGamma {
        shape: twice_shape / 2.0,
        scale: n as f64 / 2.0,
    })
}

/// Heavy-tailed family of the conflicting prior in the reduced target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitFamily {
    /// Location conflict; leaves a `σ^γ` trace.
    Student { dof: f64 },
    /// Location conflict; no trace.
    Lptn,
    /// Location or scaling conflict; leaves a `σ⁻¹` trace.
    Ctn,
}

/// `σ²` law of the reduced target (Jeffreys σ prior) once the single
/// coefficient prior is in full conflict. With the conflicting prior replaced
/// by its trace `σᵏ`, the marginal of `σ` is `σ^{k−n} e^{−n/(2σ²)}`, so `σ²` is
/// inverse-gamma with shape `(n − k − 1)/2` and scale `n/2`.
pub fn limiting_sigma_posterior(n: usize, family: LimitFamily) -> Result<InverseGamma> {
    let k = match family {
        LimitFamily::Student { dof } => {
            if !(dof > 0.0 && dof.is_finite()) {
                return Err(Error::Domain(format!("degrees of freedom must be positive, got {dof}")));
            }
            dof
        }
        LimitFamily::Lptn => 0.0,
        LimitFamily::Ctn => -1.0,
    };
    sigma_law(n as f64 - k - 1.0, n)
}

/// How a single coefficient prior is in conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictKind {
    /// `|μ_j| → ∞` with `λ_j` fixed.
    Location,
    /// `λ_j → ∞` with `μ_j ≠ β_j` fixed.
    Scaling,
}

/// Limiting posterior when the priors in the conflict set are in full
/// conflict: conflicting priors are dropped and their traces move into the
/// σ prior.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitingTarget {
    target: PosteriorTarget,
    conflicts: Vec<(usize, ConflictKind)>,
    base_priors: Vec<BetaPrior>,
}

impl LimitingTarget {
    /// `conflicts` lists coefficient indices and their conflict kind. The
    /// priors of `base` fix the families; their locations and scales along a
    /// path are passed to [`LimitingTarget::log_normalizer`].
    pub fn new(base: &PosteriorTarget, conflicts: &[(usize, ConflictKind)]) -> Result<Self> {
        let mut priors = base.priors().to_vec();
        let mut power = 0.0;
        for &(j, kind) in conflicts {
            let prior = match priors.get(j) {
                Some(BetaPrior::Scaled(c)) => *c,
                Some(BetaPrior::Flat) => {
                    return Err(Error::Domain(format!("coefficient {j} has a flat prior and cannot conflict")))
                }
                None => return Err(Error::Domain(format!("no coefficient {j}"))),
            };
            power += trace_power(prior.family(), kind)?;
            priors[j] = BetaPrior::Flat;
        }
        let sigma = base.sigma_prior().clone().adjusted(power);
        let target = PosteriorTarget::with_error_family(base.data().clone(), priors, sigma, *base.error_family())?;
        Ok(Self {
            target,
            conflicts: conflicts.to_vec(),
            base_priors: base.priors().to_vec(),
        })
    }

    pub fn target(&self) -> &PosteriorTarget {
        &self.target
    }

    pub fn conflicts(&self) -> &[(usize, ConflictKind)] {
        &self.conflicts
    }

    /// Sum over the conflict set of the log factor by which the marginal
    /// likelihood must be divided, evaluated at the hyperparameters of
    /// `priors` (a point on a conflict path).
    pub fn log_normalizer(&self, priors: &[BetaPrior]) -> Result<f64> {
        let mut total = 0.0;
        for &(j, kind) in &self.conflicts {
            let c = match (priors.get(j), self.base_priors.get(j)) {
                (Some(BetaPrior::Scaled(c)), Some(BetaPrior::Scaled(b))) if c.family() == b.family() => c,
                _ => return Err(Error::Domain(format!("prior {j} does not match the limiting target"))),
            };
            let lam = c.precision();
            total += match (c.family(), kind) {
                (PriorFamily::Lptn(_), ConflictKind::Location) => c.family().log_density(c.location()),
                (PriorFamily::Student(s), ConflictKind::Location) => {
                    c.family().log_density(c.location()) - s.dof() * lam.ln()
                }
                (PriorFamily::Ctn(k), _) => lam.ln() + c.family().log_density(k.threshold()),
                (fam, kind) => return Err(no_limit(fam, kind)),
            };
        }
        Ok(total)
    }
}

fn no_limit(fam: &PriorFamily, kind: ConflictKind) -> Error {
    Error::Domain(format!("{fam} prior has no conflict limit of kind {kind:?}"))
}

/// Exponent `k` of the `σᵏ` trace left by a prior in conflict.
fn trace_power(fam: &PriorFamily, kind: ConflictKind) -> Result<f64> {
    match (fam, kind) {
        (PriorFamily::Lptn(_), ConflictKind::Location) => Ok(0.0),
        (PriorFamily::Student(s), ConflictKind::Location) => Ok(s.dof()),
        (PriorFamily::Ctn(_), _) => Ok(-1.0),
        (fam, kind) => Err(no_limit(fam, kind)),
    }
}

/// Tolerances of the nested quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub inner: Tolerance,
    pub outer: Tolerance,
    /// Stop expanding the ν range after this many posterior-scale widths.
    pub max_box_widths: f64,
    /// Relative density at which the ν range is cut.
    pub cutoff: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            inner: Tolerance {
                abs_tol: 1e-300,
                rel_tol: 1e-11,
                max_panels: 4000,
            },
            // the outer integrand carries the inner integration error
            outer: Tolerance {
                abs_tol: 1e-300,
                rel_tol: 1e-9,
                max_panels: 4000,
            },
            max_box_widths: 1e6,
            cutoff: 1e-12,
        }
    }
}

impl GridSpec {
    /// Same spec with tolerances halved and panel budgets doubled.
    pub fn doubled(&self) -> Self {
        let twice = |t: Tolerance| Tolerance {
            abs_tol: t.abs_tol / 2.0,
            rel_tol: t.rel_tol / 2.0,
            max_panels: 2 * t.max_panels,
        };
        Self {
            inner: twice(self.inner),
            outer: twice(self.outer),
            max_box_widths: self.max_box_widths,
            cutoff: self.cutoff / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean: f64,
    pub sd: f64,
    /// `ln ∫∫ π(β, ν | y) dβ dν` of the unnormalized target.
    pub log_normalizer: f64,
    pub sigma_sq_mean: f64,
    pub sigma_sq_var: f64,
    pub evaluations: usize,
}

/// Breakpoints for the inner β integral at fixed σ, and the tail scale.
fn beta_breakpoints(target: &PosteriorTarget, sigma: f64, beta_hat: f64) -> (Vec<f64>, f64) {
    let info = target.design_precision()[0];
    let like_scale = sigma / info.sqrt();
    let mut centers = vec![beta_hat];
    let mut scales = vec![like_scale];
    if let BetaPrior::Scaled(c) = target.priors()[0] {
        let lam = c.precision();
        let mu = c.location();
        let prior_scale = sigma / lam;
        centers.push(mu);
        centers.push((info * beta_hat + lam * lam * mu) / (info + lam * lam));
        scales.push(prior_scale);
        scales.push(sigma / (info + lam * lam).sqrt());
        if let Some(k) = c.family().kink() {
            centers.push(mu - k * prior_scale);
            centers.push(mu + k * prior_scale);
        }
    }
    let mut bp = vec![f64::NEG_INFINITY, f64::INFINITY];
    for &c in &centers {
        bp.push(c);
        for &s in &scales {
            for m in [1.0, 3.0, 6.0] {
                bp.push(c - m * s);
                bp.push(c + m * s);
            }
        }
    }
    bp.retain(|v| !v.is_nan());
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let tail = scales.iter().copied().fold(0.0, f64::max);
    (bp, tail)
}

struct Slice {
    log_mass: f64,
    m1: f64,
    m2: f64,
    evaluations: usize,
}

fn inner_slice(target: &PosteriorTarget, nu: f64, beta_hat: f64, tol: Tolerance) -> Result<Slice> {
    let sigma = nu.exp();
    let (bp, tail) = beta_breakpoints(target, sigma, beta_hat);
    let shift = bp
        .iter()
        .filter(|b| b.is_finite())
        .map(|&b| target.log_posterior(&[b], nu))
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Ok(Slice { log_mass: f64::NEG_INFINITY, m1: 0.0, m2: 0.0, evaluations: 0 });
    }
    // moments about a local center keep the second moment well conditioned
    let center = beta_hat;
    let r = integrate(
        |b| {
            let w = (target.log_posterior(&[b], nu) - shift).exp();
            let d = b - center;
            [w, w * d, w * d * d]
        },
        &bp,
        tail,
        tol,
    )?;
    if !r.converged {
        return Err(Error::Integrability(format!("inner quadrature did not converge at nu = {nu}")));
    }
    let [i0, i1, i2] = r.value;
    if !(i0 > 0.0) {
        return Ok(Slice { log_mass: f64::NEG_INFINITY, m1: 0.0, m2: 0.0, evaluations: r.evaluations });
    }
    let d1 = i1 / i0;
    Ok(Slice {
        log_mass: shift + i0.ln(),
        m1: center + d1,
        m2: i2 / i0 + 2.0 * center * d1 + center * center,
        evaluations: r.evaluations,
    })
}

/// Posterior moments of the single coefficient and of `σ²` by nested adaptive
/// quadrature over `(β, ν)`.
pub fn quadrature_moments(target: &PosteriorTarget, spec: &GridSpec) -> Result<QuadratureMoments> {
    if target.p() != 1 {
        return Err(Error::Domain(format!("quadrature oracle handles one coefficient, target has {}", target.p())));
    }
    if let Some(w) = target
        .warnings()
        .iter()
        .find(|w| matches!(w, PropernessWarning::ImproperCtnScale { .. }))
    {
        return Err(Error::ImproperPosterior(w.to_string()));
    }
    let (beta_hat, nu0) = target
        .ols_point()
        .map(|(b, nu)| (b[0], nu))
        .ok_or(Error::RankDeficient)?;
    let mut evaluations = 0;
    let first = inner_slice(target, nu0, beta_hat, spec.inner)?;
    evaluations += first.evaluations;
    // the mean is integrated as `m1 − offset`, with `offset` one local posterior
    // SD below the center, so its convergence scale never collapses to zero
    let local_sd = (first.m2 - first.m1 * first.m1).max(0.0).sqrt();
    let offset = first.m1 - if local_sd > 0.0 { local_sd } else { 1.0 };
    let mut h = |nu: f64| -> Result<f64> {
        let s = inner_slice(target, nu, beta_hat, spec.inner)?;
        evaluations += s.evaluations;
        Ok(s.log_mass)
    };

    // Expand a ν range around the least-squares scale until the slice mass
    // falls below `cutoff` times the largest value seen.
    let width = 1.0 / (2.0 * target.n() as f64).sqrt();
    let log_cut = spec.cutoff.ln();
    let mut probes = vec![(nu0, first.log_mass)];
    let mut peak = probes[0].1;
    let mut reach = [width, width];
    let mut done = [false, false];
    while !(done[0] && done[1]) {
        for (side, sign) in [(0usize, -1.0), (1usize, 1.0)] {
            if done[side] {
                continue;
            }
            if reach[side] > spec.max_box_widths * width {
                return Err(Error::Integrability(format!(
                    "nu range exceeded {} posterior widths without the density decaying",
                    spec.max_box_widths
                )));
            }
            let nu = nu0 + sign * reach[side];
            let v = h(nu)?;
            probes.push((nu, v));
            peak = peak.max(v);
            if v < peak + log_cut {
                done[side] = true;
            } else {
                reach[side] *= 2.0;
            }
        }
        // a new peak can invalidate an earlier stop
        for side in 0..2 {
            let edge = probes
                .iter()
                .filter(|(nu, _)| if side == 0 { *nu <= nu0 } else { *nu >= nu0 })
                .max_by(|a, b| (a.0 - nu0).abs().total_cmp(&(b.0 - nu0).abs()))
                .map(|p| p.1)
                .unwrap_or(f64::NEG_INFINITY);
            if done[side] && edge >= peak + log_cut {
                done[side] = false;
                reach[side] *= 2.0;
            }
        }
    }
    if !peak.is_finite() {
        return Err(Error::Integrability("posterior density vanishes on the explored range".into()));
    }
    let mut bp: Vec<f64> = probes.iter().map(|p| p.0).collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup();

    let mut err: Option<Error> = None;
    let r = integrate(
        |nu| {
            if err.is_some() {
                return [0.0; 5];
            }
            match inner_slice(target, nu, beta_hat, spec.inner) {
                Ok(s) => {
                    evaluations += s.evaluations;
                    let w = (s.log_mass - peak).exp();
                    let s2 = (2.0 * nu).exp();
                    [w, w * (s.m1 - offset), w * s.m2, w * s2, w * s2 * s2]
                }
                Err(e) => {
                    err = Some(e);
                    [0.0; 5]
                }
            }
        },
        &bp,
        width,
        spec.outer,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    if !r.converged {
        return Err(Error::Integrability(format!(
            "outer quadrature did not converge (error {:?} on {:?})",
            r.error, r.value
        )));
    }
    let [z, e1, e2, s1, s2] = r.value;
    let mean = offset + e1 / z;
    let var = (e2 / z - mean * mean).max(0.0);
    let sm = s1 / z;
    Ok(QuadratureMoments {
        mean,
        sd: var.sqrt(),
        log_normalizer: peak + z.ln(),
        sigma_sq_mean: sm,
        sigma_sq_var: (s2 / z - sm * sm).max(0.0),
        evaluations: evaluations + r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReducedPrior, SigmaPrior};
    use crate::priors::{derive_ctn, derive_lptn};

    fn reduced(prior: ReducedPrior) -> PosteriorTarget {
        PosteriorTarget::reduced(100, prior, SigmaPrior::Jeffreys).unwrap()
    }

    fn informative(family: PriorFamily, location: f64, scaling: f64) -> ReducedPrior {
        ReducedPrior::Informative { family, location, scaling }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn conjugate_examples() {
        let r = conjugate_posterior(100, 0.0, 1.0).unwrap();
        assert_eq!(r.beta_mean, 0.0);
        assert!((r.beta_variance - 0.5 / 98.0).abs() < 1e-15);
        let r = conjugate_posterior(100, 2.0, 1.0).unwrap();
        assert!((r.beta_mean - 1.0).abs() < 1e-15);
        assert!((r.beta_variance - 1.5 / 98.0).abs() < 1e-15);
        assert_eq!(r.sigma_sq_shape, 50.0);
        assert!((r.sigma_sq_scale - 150.0).abs() < 1e-12);
        assert!(conjugate_posterior(100, 7.0, 1e-9).unwrap().beta_mean.abs() < 1e-15);
        assert!(matches!(conjugate_posterior(2, 0.0, 1.0), Err(Error::UndefinedVariance(_))));
        assert!(conjugate_posterior(10, 0.0, 0.0).is_err());
    }

    #[test]
    fn conjugate_variance_is_mixture_over_sigma() {
        // Var β = E[σ²]/(n(1 + λ²)) under the inverse-gamma σ² law
        for (mu, lam) in [(0.0, 0.5), (1.0, 2.0), (2.0, 1.0)] {
            let r = conjugate_posterior(100, mu, lam).unwrap();
            let v = r.sigma_sq().mean().unwrap() / (100.0 * (1.0 + lam * lam));
            assert!(rel(v, r.beta_variance) < 1e-14);
        }
    }

    #[test]
    fn jeffreys_examples() {
        assert_eq!(jeffreys_benchmark(100).unwrap(), (0.0, 1.0 / 97.0));
        assert_eq!(jeffreys_benchmark(4).unwrap(), (0.0, 1.0));
        assert!(matches!(jeffreys_benchmark(3), Err(Error::ImproperPosterior(_))));
        // E[σ²]/n reproduces 1/(n − 3)
        let ig = jeffreys_sigma_posterior(100).unwrap();
        assert!(rel(ig.mean().unwrap() / 100.0, 1.0 / 97.0) < 1e-14);
    }

    #[test]
    fn limiting_sigma_laws() {
        let s = limiting_sigma_posterior(100, LimitFamily::Student { dof: 4.0 }).unwrap();
        assert_eq!((s.shape, s.scale), (47.5, 50.0));
        let l = limiting_sigma_posterior(100, LimitFamily::Lptn).unwrap();
        assert_eq!((l.shape, l.scale), (49.5, 50.0));
        assert_eq!(l, jeffreys_sigma_posterior(100).unwrap());
        let c = limiting_sigma_posterior(100, LimitFamily::Ctn).unwrap();
        assert_eq!((c.shape, c.scale), (50.0, 50.0));
        assert!(limiting_sigma_posterior(3, LimitFamily::Student { dof: 4.0 }).is_err());
    }

    #[test]
    fn quadrature_jeffreys() {
        let q = quadrature_moments(&reduced(ReducedPrior::Flat), &GridSpec::default()).unwrap();
        assert!(q.mean.abs() < 1e-6, "{q:?}");
        assert!(rel(q.sd * q.sd, 1.0 / 97.0) < 1e-6, "{q:?}");
        let ig = jeffreys_sigma_posterior(100).unwrap();
        assert!(rel(q.sigma_sq_mean, ig.mean().unwrap()) < 1e-6);
        assert!(rel(q.sigma_sq_var, ig.variance().unwrap()) < 1e-6);
    }

    #[test]
    fn quadrature_matches_conjugate() {
        for mu in [0.0, 1.0, 2.0] {
            for lam in [0.5, 1.0, 2.0] {
                let q = quadrature_moments(&reduced(informative(PriorFamily::Normal, mu, lam)), &GridSpec::default()).unwrap();
                let c = conjugate_posterior(100, mu, lam).unwrap();
                assert!((q.mean - c.beta_mean).abs() < 1e-8, "({mu},{lam}) {q:?}");
                assert!(rel(q.sd * q.sd, c.beta_variance) < 1e-6, "({mu},{lam}) {q:?}");
                assert!(rel(q.sigma_sq_mean, c.sigma_sq().mean().unwrap()) < 1e-6);
            }
        }
    }

    #[test]
    fn quadrature_normalizer_closed_form() {
        // ∫∫ σ^{-(n+1)} (2π)^{-n/2} e^{-n(1+β²)/(2σ²)} dβ dσ
        //   = (2π)^{-n/2} √(2π/n) · ½ Γ((n−1)/2) (n/2)^{−(n−1)/2}
        let n = 100.0f64;
        let expect = -n / 2.0 * (2.0 * std::f64::consts::PI).ln()
            + 0.5 * (2.0 * std::f64::consts::PI / n).ln()
            + (0.5f64).ln()
            + libm::lgamma((n - 1.0) / 2.0)
            - (n - 1.0) / 2.0 * (n / 2.0).ln();
        let q = quadrature_moments(&reduced(ReducedPrior::Flat), &GridSpec::default()).unwrap();
        assert!((q.log_normalizer - expect).abs() < 1e-8, "{} vs {expect}", q.log_normalizer);
    }

    #[test]
    fn quadrature_lptn_far_location_returns_to_zero() {
        let q = quadrature_moments(&reduced(informative(derive_lptn(0.95).unwrap(), 2.0, 1.0)), &GridSpec::default()).unwrap();
        assert!(q.mean.abs() < 0.05, "{q:?}");
    }

    #[test]
    fn doubled_precision_agrees() {
        for prior in [
            informative(derive_lptn(0.95).unwrap(), 1.0, 1.0),
            informative(PriorFamily::student(4.0).unwrap(), 1.5, 1.0),
            informative(derive_ctn(0.98).unwrap(), 0.5, 1.5),
        ] {
            let t = reduced(prior);
            let a = quadrature_moments(&t, &GridSpec::default()).unwrap();
            let b = quadrature_moments(&t, &GridSpec::default().doubled()).unwrap();
            assert!((a.mean - b.mean).abs() < 1e-5);
            assert!((a.log_normalizer - b.log_normalizer).abs() < 1e-6);
        }
    }

    #[test]
    fn quadrature_rejects_general_targets() {
        let data = crate::model::RegressionData::from_columns(
            vec![1.0, 2.0, 0.5, 1.5],
            &[("x".into(), vec![0.0, 1.0, 2.0, 3.0])],
        )
        .unwrap();
        let t = PosteriorTarget::new(data, vec![BetaPrior::Flat; 2], SigmaPrior::Jeffreys).unwrap();
        assert!(matches!(quadrature_moments(&t, &GridSpec::default()), Err(Error::Domain(_))));
        let small = PosteriorTarget::reduced(3, informative(derive_ctn(0.98).unwrap(), 0.0, 1.0), SigmaPrior::Jeffreys).unwrap();
        assert!(matches!(quadrature_moments(&small, &GridSpec::default()), Err(Error::ImproperPosterior(_))));
    }

    #[test]
    fn limiting_target_structure() {
        let base = reduced(informative(PriorFamily::student(4.0).unwrap(), 3.0, 1.0));
        let lim = LimitingTarget::new(&base, &[(0, ConflictKind::Location)]).unwrap();
        assert_eq!(lim.target().priors(), &[BetaPrior::Flat]);
        assert_eq!(lim.target().sigma_prior(), &SigmaPrior::Jeffreys.adjusted(4.0));
        assert!(LimitingTarget::new(&reduced(informative(PriorFamily::Normal, 3.0, 1.0)), &[(0, ConflictKind::Location)]).is_err());
        assert!(LimitingTarget::new(&reduced(informative(derive_lptn(0.95).unwrap(), 3.0, 1.0)), &[(0, ConflictKind::Scaling)]).is_err());
        assert!(LimitingTarget::new(&reduced(ReducedPrior::Flat), &[(0, ConflictKind::Location)]).is_err());
    }

    #[test]
    fn limiting_sigma_laws_match_quadrature() {
        let lptn = LimitingTarget::new(&reduced(informative(derive_lptn(0.95).unwrap(), 3.0, 1.0)), &[(0, ConflictKind::Location)]).unwrap();
        let st = LimitingTarget::new(&reduced(informative(PriorFamily::student(4.0).unwrap(), 3.0, 1.0)), &[(0, ConflictKind::Location)]).unwrap();
        let ctn = LimitingTarget::new(&reduced(informative(derive_ctn(0.98).unwrap(), 3.0, 1.0)), &[(0, ConflictKind::Location)]).unwrap();
        for (lim, fam) in [(lptn, LimitFamily::Lptn), (st, LimitFamily::Student { dof: 4.0 }), (ctn, LimitFamily::Ctn)] {
            let q = quadrature_moments(lim.target(), &GridSpec::default()).unwrap();
            let ig = limiting_sigma_posterior(100, fam).unwrap();
            assert!(rel(q.sigma_sq_mean, ig.mean().unwrap()) < 1e-6, "{fam:?} {q:?}");
            assert!(rel(q.sigma_sq_var, ig.variance().unwrap()) < 1e-6, "{fam:?} {q:?}");
        }
    }
}
