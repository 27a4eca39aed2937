//! C interface to `robust-priors`.
//!
//! Objects cross the boundary as opaque handles created by `rp_*_new`-style
//! functions and released by the matching `rp_*_free`. Every fallible call
//! returns an `RpStatus`; on failure `rp_last_error_message` describes the
//! error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robust_priors::model::{PosteriorTarget, ReducedPrior, SigmaPrior};
use robust_priors::oracle::{quadrature_moments, GridSpec};
use robust_priors::sampler::{sample, summarize, Chain, HmcConfig, LogDensity};
use robust_priors::{derive_ctn, derive_lptn, Error, PriorFamily};

/// Status codes; the nonzero values match the command-line exit codes where
/// they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Data = 3,
    Numerical = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

pub const RP_FAMILY_FLAT: c_int = 0;
pub const RP_FAMILY_NORMAL: c_int = 1;
pub const RP_FAMILY_STUDENT: c_int = 2;
pub const RP_FAMILY_LPTN: c_int = 3;
pub const RP_FAMILY_CTN: c_int = 4;

/// Reduced `(β₂, ln σ)` posterior.
pub struct RpTarget {
    inner: PosteriorTarget,
}

/// Draws of all chains from one sampler run.
pub struct RpChains {
    chains: Vec<Chain>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RpMoments {
    pub mean: f64,
    pub sd: f64,
    pub log_normalizer: f64,
    pub sigma_sq_mean: f64,
    pub sigma_sq_var: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpHmcConfig {
    pub step_size: f64,
    pub leapfrog_steps: usize,
    pub n_samples: usize,
    pub n_warmup: usize,
    pub n_chains: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RpSummary {
    pub mean: f64,
    pub sd: f64,
    pub ess: f64,
    pub mcse: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RpStatus {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Io(_) => RpStatus::Config,
        Error::DegenerateInput(_)
        | Error::DegenerateColumn(_)
        | Error::RankDeficient
        | Error::TooFewObservations { .. }
        | Error::MalformedData(_) => RpStatus::Data,
        Error::UndefinedVariance(_)
        | Error::ImproperPosterior(_)
        | Error::Integrability(_)
        | Error::Divergence { .. }
        | Error::EmptyChains(_) => RpStatus::Numerical,
    }
}

/// Run `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (RpStatus, String)>) -> RpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RpStatus::Panic
        }
    }
}

fn lib<T>(r: robust_priors::Result<T>) -> Result<T, (RpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (RpStatus, String) {
    (RpStatus::NullPointer, format!("{what} is null"))
}

fn family(tag: c_int, hyper: f64) -> Result<Option<PriorFamily>, (RpStatus, String)> {
    match tag {
        RP_FAMILY_FLAT => Ok(None),
        RP_FAMILY_NORMAL => Ok(Some(PriorFamily::Normal)),
        RP_FAMILY_STUDENT => lib(PriorFamily::student(hyper)).map(Some),
        RP_FAMILY_LPTN => lib(derive_lptn(hyper)).map(Some),
        RP_FAMILY_CTN => lib(derive_ctn(hyper)).map(Some),
        other => Err((RpStatus::Config, format!("unknown family tag {other}"))),
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Log density of a standardized prior family at `z`. `hyper` is γ, ρ or ϱ
/// and is ignored for the normal family.
///
/// # Safety
/// `out` must be null or point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn rp_prior_log_density(tag: c_int, hyper: f64, z: f64, out: *mut f64) -> RpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = family(tag, hyper)?.ok_or((RpStatus::Config, "the flat prior has no density".to_string()))?;
        *out = f.log_density(z);
        Ok(())
    })
}

/// Reduced target with `n` observations, a coefficient prior of family `tag`
/// with location `mu2` and user-facing scaling `lambda2` (multiplied by `√n`),
/// and the σ prior `σ^sigma_power / σ`.
///
/// # Safety
/// `out` must be null or point to writable memory for one handle.
#[no_mangle]
pub unsafe extern "C" fn rp_target_reduced(
    n: usize,
    tag: c_int,
    hyper: f64,
    mu2: f64,
    lambda2: f64,
    sigma_power: f64,
    out: *mut *mut RpTarget,
) -> RpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let prior = match family(tag, hyper)? {
            None => ReducedPrior::Flat,
            Some(f) => ReducedPrior::Informative {
                family: f,
                location: mu2,
                scaling: lambda2,
            },
        };
        if !sigma_power.is_finite() {
            return Err((RpStatus::Config, "sigma_power must be finite".into()));
        }
        let t = lib(PosteriorTarget::reduced(n, prior, SigmaPrior::Jeffreys.adjusted(sigma_power)))?;
        *out = Box::into_raw(Box::new(RpTarget { inner: t }));
        Ok(())
    })
}

/// # Safety
/// `target` must be null or a handle from `rp_target_reduced` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rp_target_free(target: *mut RpTarget) {
    if !target.is_null() {
        drop(Box::from_raw(target));
    }
}

/// Number of sampled coordinates, `p + 1`; 0 for a null handle.
///
/// # Safety
/// `target` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_target_dim(target: *const RpTarget) -> usize {
    target.as_ref().map_or(0, |t| t.inner.dim())
}

/// Log posterior at `q = (β, ν)` and its gradient.
///
/// # Safety
/// `target` must be a live handle; `q` and `grad` (if not null) must hold
/// `rp_target_dim(target)` doubles.
#[no_mangle]
pub unsafe extern "C" fn rp_log_posterior(
    target: *const RpTarget,
    q: *const f64,
    log_density: *mut f64,
    grad: *mut f64,
) -> RpStatus {
    guard(|| {
        let t = target.as_ref().ok_or_else(|| null("target"))?;
        if q.is_null() || log_density.is_null() {
            return Err(null("q or log_density"));
        }
        let d = t.inner.dim();
        let q = std::slice::from_raw_parts(q, d);
        let mut g = vec![0.0; d];
        *log_density = t.inner.log_density_and_grad(q, &mut g);
        if !grad.is_null() {
            std::slice::from_raw_parts_mut(grad, d).copy_from_slice(&g);
        }
        Ok(())
    })
}

/// Posterior moments of `β₂` and `σ²` by quadrature.
///
/// # Safety
/// `target` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_quadrature_moments(target: *const RpTarget, out: *mut RpMoments) -> RpStatus {
    guard(|| {
        let t = target.as_ref().ok_or_else(|| null("target"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = lib(quadrature_moments(&t.inner, &GridSpec::default()))?;
        *out = RpMoments {
            mean: q.mean,
            sd: q.sd,
            log_normalizer: q.log_normalizer,
            sigma_sq_mean: q.sigma_sq_mean,
            sigma_sq_var: q.sigma_sq_var,
        };
        Ok(())
    })
}

/// Default sampler settings.
#[no_mangle]
pub extern "C" fn rp_hmc_config_default() -> RpHmcConfig {
    let d = HmcConfig::default();
    RpHmcConfig {
        step_size: d.step_size,
        leapfrog_steps: d.leapfrog_steps,
        n_samples: d.n_samples,
        n_warmup: d.n_warmup,
        n_chains: d.n_chains,
        seed: d.rng_seed,
    }
}

/// Run HMC on `target`.
///
/// # Safety
/// `target` must be a live handle, `config` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_sample(
    target: *const RpTarget,
    config: *const RpHmcConfig,
    out: *mut *mut RpChains,
) -> RpStatus {
    guard(|| {
        let t = target.as_ref().ok_or_else(|| null("target"))?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = HmcConfig {
            step_size: c.step_size,
            leapfrog_steps: c.leapfrog_steps,
            n_samples: c.n_samples,
            n_warmup: c.n_warmup,
            n_chains: c.n_chains,
            rng_seed: c.seed,
            mass: None,
        };
        let chains = lib(sample(&t.inner, &cfg))?;
        *out = Box::into_raw(Box::new(RpChains { chains }));
        Ok(())
    })
}

/// # Safety
/// `chains` must be null or a handle from `rp_sample` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rp_chains_free(chains: *mut RpChains) {
    if !chains.is_null() {
        drop(Box::from_raw(chains));
    }
}

/// Number of chains; 0 for a null handle.
///
/// # Safety
/// `chains` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_chains_count(chains: *const RpChains) -> usize {
    chains.as_ref().map_or(0, |c| c.chains.len())
}

/// Draws per chain; 0 for a null handle.
///
/// # Safety
/// `chains` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rp_chains_len(chains: *const RpChains) -> usize {
    chains.as_ref().and_then(|c| c.chains.first()).map_or(0, Chain::len)
}

/// Copy coordinate `coord` of chain `chain` into `buf`, which holds `len`
/// doubles; at least `rp_chains_len` are needed.
///
/// # Safety
/// `chains` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rp_chains_copy(
    chains: *const RpChains,
    chain: usize,
    coord: usize,
    buf: *mut f64,
    len: usize,
) -> RpStatus {
    guard(|| {
        let c = chains.as_ref().ok_or_else(|| null("chains"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let ch = c
            .chains
            .get(chain)
            .ok_or((RpStatus::Config, format!("chain {chain} out of range")))?;
        if coord >= ch.dim() {
            return Err((RpStatus::Config, format!("coordinate {coord} out of range")));
        }
        if len < ch.len() {
            return Err((RpStatus::BufferTooSmall, format!("need {} doubles, got {len}", ch.len())));
        }
        std::slice::from_raw_parts_mut(buf, ch.len()).copy_from_slice(&ch.column(coord));
        Ok(())
    })
}

/// Pooled summary of coordinate `coord` (the last one is `ν = ln σ`).
///
/// # Safety
/// `chains` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rp_chains_summary(chains: *const RpChains, coord: usize, out: *mut RpSummary) -> RpStatus {
    guard(|| {
        let c = chains.as_ref().ok_or_else(|| null("chains"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lib(summarize(&c.chains))?;
        let dim = c.chains.first().map_or(0, Chain::dim);
        if coord >= dim {
            return Err((RpStatus::Config, format!("coordinate {coord} out of range")));
        }
        let p = &s.params[coord];
        *out = RpSummary {
            mean: p.mean,
            sd: p.sd,
            ess: p.ess,
            mcse: p.mcse,
        };
        Ok(())
    })
}
