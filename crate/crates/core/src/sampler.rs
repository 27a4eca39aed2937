//! Hamiltonian Monte Carlo with a fixed step size and jittered trajectory
//! length, plus pooled chain summaries.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PosteriorTarget;

/// Energy error above which a trajectory counts as divergent.
const DIVERGENCE_THRESHOLD: f64 = 1000.0;
/// Fraction of divergent trajectories that aborts sampling.
const MAX_DIVERGENT_FRACTION: f64 = 0.1;

/// A differentiable log-density on `ℝᵈ`.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    /// Returns `ln π(q)` and writes its gradient into `grad`.
    fn log_density_and_grad(&self, q: &[f64], grad: &mut [f64]) -> f64;

    /// Starting point for the chains (before jitter).
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
}

impl LogDensity for PosteriorTarget {
    fn dim(&self) -> usize {
        self.p() + 1
    }

    fn log_density_and_grad(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let p = self.p();
        self.log_posterior_and_grad(&q[..p], q[p], grad)
    }

    fn initial_point(&self) -> Vec<f64> {
        match self.ols_point() {
            Some((mut b, nu)) => {
                b.push(nu);
                b
            }
            None => vec![0.0; self.p() + 1],
        }
    }
}

/// Isotropic standard normal in `dim` dimensions.
#[derive(Debug, Clone, Copy)]
pub struct StandardNormalTarget {
    pub dim: usize,
}

impl LogDensity for StandardNormalTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density_and_grad(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let mut lp = 0.0;
        for (g, x) in grad.iter_mut().zip(q) {
            *g = -x;
            lp -= 0.5 * x * x;
        }
        lp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmcConfig {
    pub step_size: f64,
    pub leapfrog_steps: usize,
    pub n_samples: usize,
    pub n_warmup: usize,
    pub n_chains: usize,
    pub rng_seed: u64,
    /// Diagonal mass; `None` is the identity.
    pub mass: Option<Vec<f64>>,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            step_size: 0.05,
            leapfrog_steps: 30,
            n_samples: 20_000,
            n_warmup: 2_000,
            n_chains: 4,
            rng_seed: 1,
            mass: None,
        }
    }
}

impl HmcConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::Config(format!("step size must be finite and positive, got {}", self.step_size)));
        }
        if self.leapfrog_steps == 0 || self.n_samples == 0 || self.n_chains == 0 {
            return Err(Error::Config("leapfrog steps, samples and chains must be positive".into()));
        }
        if let Some(m) = &self.mass {
            if m.len() != dim || m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Config(format!("mass must hold {dim} positive finite weights")));
            }
        }
        Ok(())
    }

    /// Range of trajectory lengths drawn uniformly per iteration.
    pub fn step_range(&self) -> (usize, usize) {
        let l = self.leapfrog_steps as f64;
        ((0.8 * l).ceil().max(1.0) as usize, (1.2 * l).ceil() as usize)
    }
}

/// Post-warmup draws of one chain, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    dim: usize,
    draws: Vec<f64>,
    pub accept_rate: f64,
    pub divergences: usize,
    pub seed: u64,
    pub index: usize,
}

impl Chain {
    /// Wrap externally produced draws (row-major, `dim` per row).
    pub fn from_draws(dim: usize, draws: Vec<f64>, seed: u64, index: usize) -> Result<Self> {
        if dim == 0 || !draws.len().is_multiple_of(dim) {
            return Err(Error::Domain("draw buffer is not a whole number of rows".into()));
        }
        Ok(Self {
            dim,
            draws,
            accept_rate: 1.0,
            divergences: 0,
            seed,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.draws.len() / self.dim
    }
    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
    pub fn draw(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.draws.iter().skip(k).step_by(self.dim).copied().collect()
    }
}

/// End state of a leapfrog trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub log_density: f64,
    pub divergent: bool,
}

/// `steps` leapfrog steps with identity mass.
pub fn leapfrog<T: LogDensity + ?Sized>(
    target: &T,
    position: &[f64],
    momentum: &[f64],
    step_size: f64,
    steps: usize,
) -> Trajectory {
    let inv_mass = vec![1.0; position.len()];
    let mut grad = vec![0.0; position.len()];
    let lp = target.log_density_and_grad(position, &mut grad);
    integrate(target, position.to_vec(), momentum.to_vec(), lp, &mut grad, &inv_mass, step_size, steps)
}

#[allow(clippy::too_many_arguments)]
fn integrate<T: LogDensity + ?Sized>(
    target: &T,
    mut q: Vec<f64>,
    mut p: Vec<f64>,
    mut lp: f64,
    grad: &mut [f64],
    inv_mass: &[f64],
    eps: f64,
    steps: usize,
) -> Trajectory {
    let mut divergent = !lp.is_finite();
    for (pi, g) in p.iter_mut().zip(grad.iter()) {
        *pi += 0.5 * eps * g;
    }
    for s in 0..steps {
        for ((qi, pi), m) in q.iter_mut().zip(&p).zip(inv_mass) {
            *qi += eps * pi * m;
        }
        lp = target.log_density_and_grad(&q, grad);
        if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            divergent = true;
            break;
        }
        let w = if s + 1 == steps { 0.5 } else { 1.0 };
        for (pi, g) in p.iter_mut().zip(grad.iter()) {
            *pi += w * eps * g;
        }
    }
    Trajectory {
        position: q,
        momentum: p,
        log_density: lp,
        divergent,
    }
}

fn kinetic(p: &[f64], inv_mass: &[f64]) -> f64 {
    0.5 * p.iter().zip(inv_mass).map(|(x, m)| x * x * m).sum::<f64>()
}

struct ChainRun {
    chain: Chain,
    trajectories: usize,
    last_divergent: Option<Vec<f64>>,
}

fn run_chain<T: LogDensity + ?Sized>(target: &T, config: &HmcConfig, index: usize) -> ChainRun {
    let dim = target.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(index as u64);
    let mass = config.mass.clone().unwrap_or_else(|| vec![1.0; dim]);
    let inv_mass: Vec<f64> = mass.iter().map(|m| 1.0 / m).collect();
    let sqrt_mass: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
    let (lmin, lmax) = config.step_range();

    let mut q = target.initial_point();
    for x in q.iter_mut() {
        *x += 0.1 * rng.sample::<f64, _>(StandardNormal);
    }
    let mut grad = vec![0.0; dim];
    let mut lp = target.log_density_and_grad(&q, &mut grad);

    let total = config.n_warmup + config.n_samples;
    let mut draws = Vec::with_capacity(config.n_samples * dim);
    let mut accepted = 0usize;
    let mut divergences = 0usize;
    let mut last_divergent = None;
    for iter in 0..total {
        let p0: Vec<f64> = sqrt_mass
            .iter()
            .map(|s| s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let steps = rng.random_range(lmin..=lmax);
        let mut g = grad.clone();
        let h0 = -lp + kinetic(&p0, &inv_mass);
        let traj = integrate(target, q.clone(), p0, lp, &mut g, &inv_mass, config.step_size, steps);
        let h1 = -traj.log_density + kinetic(&traj.momentum, &inv_mass);
        let dh = h1 - h0;
        let u: f64 = rng.random();
        if traj.divergent || !dh.is_finite() || dh > DIVERGENCE_THRESHOLD {
            divergences += 1;
            last_divergent = Some(traj.position);
        } else if u.ln() < -dh {
            q = traj.position;
            lp = traj.log_density;
            grad = g;
            if iter >= config.n_warmup {
                accepted += 1;
            }
        }
        if iter >= config.n_warmup {
            draws.extend_from_slice(&q);
        }
    }
    ChainRun {
        chain: Chain {
            dim,
            draws,
            accept_rate: accepted as f64 / config.n_samples as f64,
            divergences,
            seed: config.rng_seed,
            index,
        },
        trajectories: total,
        last_divergent,
    }
}

/// Run `config.n_chains` independent chains concurrently; chain `k` uses
/// stream `k` of a ChaCha8 generator keyed by `config.rng_seed`.
pub fn sample<T: LogDensity + ?Sized>(target: &T, config: &HmcConfig) -> Result<Vec<Chain>> {
    config.validate(target.dim())?;
    let runs: Vec<ChainRun> = (0..config.n_chains)
        .into_par_iter()
        .map(|k| run_chain(target, config, k))
        .collect();
    let trajectories: usize = runs.iter().map(|r| r.trajectories).sum();
    let divergent: usize = runs.iter().map(|r| r.chain.divergences).sum();
    let fraction = divergent as f64 / trajectories as f64;
    if fraction > MAX_DIVERGENT_FRACTION {
        let state = runs
            .iter()
            .rev()
            .find_map(|r| r.last_divergent.clone())
            .unwrap_or_default();
        return Err(Error::Divergence {
            divergent_fraction: fraction,
            state,
        });
    }
    let chains: Vec<Chain> = runs.into_iter().map(|r| r.chain).collect();
    for w in tuning_warnings(&chains) {
        log::warn!("{w}");
    }
    Ok(chains)
}

/// Chains whose acceptance rate falls outside `[0.4, 0.95]`.
pub fn tuning_warnings(chains: &[Chain]) -> Vec<String> {
    chains
        .iter()
        .filter(|c| !(0.4..=0.95).contains(&c.accept_rate))
        .map(|c| format!("chain {} acceptance rate {:.3} outside [0.4, 0.95]; consider retuning the step size", c.index, c.accept_rate))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub ess: f64,
    pub mcse: f64,
}

/// Pooled summaries in `(β, ν)` coordinates followed by `σ = e^ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub params: Vec<ParamSummary>,
    pub total_draws: usize,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn write_csv<W: Write>(&self, mut w: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "param,mean,sd,ess,mcse")?;
        for p in &self.params {
            writeln!(w, "{},{},{},{},{}", p.name, p.mean, p.sd, p.ess, p.mcse)?;
        }
        Ok(())
    }
}

fn check_chains(chains: &[Chain]) -> Result<(usize, usize)> {
    let first = chains
        .first()
        .ok_or_else(|| Error::EmptyChains("no chains".into()))?;
    let (dim, len) = (first.dim, first.len());
    if chains.iter().any(|c| c.dim != dim || c.len() != len) {
        return Err(Error::EmptyChains("chains differ in length or dimension".into()));
    }
    if len * chains.len() < 100 {
        return Err(Error::EmptyChains(format!(
            "need at least 100 draws, have {}",
            len * chains.len()
        )));
    }
    Ok((dim, len))
}

/// Summarize draws whose last coordinate is `ν = ln σ`.
pub fn summarize(chains: &[Chain]) -> Result<PosteriorSummary> {
    let (dim, len) = check_chains(chains)?;
    let mut params = Vec::with_capacity(dim + 1);
    for k in 0..dim {
        let name = if k + 1 == dim { "nu".to_string() } else { format!("beta_{}", k + 1) };
        let cols: Vec<Vec<f64>> = chains.iter().map(|c| c.column(k)).collect();
        params.push(summarize_columns(name, &cols));
    }
    let sig: Vec<Vec<f64>> = chains
        .iter()
        .map(|c| c.column(dim - 1).into_iter().map(f64::exp).collect())
        .collect();
    params.push(summarize_columns("sigma".into(), &sig));
    Ok(PosteriorSummary {
        params,
        total_draws: len * chains.len(),
    })
}

/// Mean, SD, ESS and MCSE of one scalar across chains of equal length.
pub fn summarize_columns(name: String, cols: &[Vec<f64>]) -> ParamSummary {
    let total: usize = cols.iter().map(Vec::len).sum();
    let mean = cols.iter().flatten().sum::<f64>() / total as f64;
    let var = if total > 1 {
        cols.iter().flatten().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (total - 1) as f64
    } else {
        0.0
    };
    let sd = var.sqrt();
    let ess = effective_sample_size(cols);
    ParamSummary {
        name,
        mean,
        sd,
        ess,
        mcse: if sd == 0.0 { 0.0 } else { sd / ess.sqrt() },
    }
}

/// Multi-chain effective sample size with Geyer's initial monotone sequence
/// truncation, capped at the number of draws.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let total = (m * n) as f64;
    if m == 0 || n < 4 {
        return total;
    }
    let means: Vec<f64> = chains.iter().map(|c| c[..n].iter().sum::<f64>() / n as f64).collect();
    let acov = |t: usize| -> f64 {
        chains
            .iter()
            .zip(&means)
            .map(|(c, mu)| (0..n - t).map(|i| (c[i] - mu) * (c[i + t] - mu)).sum::<f64>() / n as f64)
            .sum::<f64>()
            / m as f64
    };
    let acov0 = acov(0);
    let nf = n as f64;
    let mean_var = acov0 * nf / (nf - 1.0);
    let mut var_plus = mean_var * (nf - 1.0) / nf;
    if m > 1 {
        let gm = means.iter().sum::<f64>() / m as f64;
        var_plus += means.iter().map(|x| (x - gm) * (x - gm)).sum::<f64>() / (m - 1) as f64;
    }
    if !(var_plus > 0.0) || !var_plus.is_finite() {
        return total;
    }
    let rho = |t: usize| 1.0 - (mean_var - acov(t)) / var_plus;

    let mut rho_t = vec![0.0; n + 2];
    rho_t[0] = 1.0;
    let mut even = 1.0;
    let mut odd = rho(1);
    rho_t[1] = odd;
    let mut t = 1;
    while t + 5 < n && even + odd > 0.0 {
        even = rho(t + 1);
        odd = rho(t + 2);
        if even + odd >= 0.0 {
            rho_t[t + 1] = even;
            rho_t[t + 2] = odd;
        }
        t += 2;
    }
    let max_t = t;
    if even > 0.0 {
        rho_t[max_t + 1] = even;
    }
    // enforce a monotone sequence of pair sums
    let mut k = 1;
    while k + 4 <= max_t {
        let prev = rho_t[k - 1] + rho_t[k];
        if rho_t[k + 1] + rho_t[k + 2] > prev {
            rho_t[k + 1] = prev / 2.0;
            rho_t[k + 2] = prev / 2.0;
        }
        k += 2;
    }
    let tau = -1.0 + 2.0 * rho_t[..=max_t].iter().sum::<f64>() + rho_t[max_t + 1];
    if !(tau > 0.0) {
        return total;
    }
    (total / tau).min(total)
}

/// Write post-warmup draws as `chain,iter,beta_1..beta_p,nu`.
pub fn write_chains_csv<W: Write>(mut w: W, chains: &[Chain], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let dim = chains.first().map_or(0, |c| c.dim);
    let mut header = String::from("chain,iter");
    for k in 1..dim {
        header.push_str(&format!(",beta_{k}"));
    }
    header.push_str(",nu");
    writeln!(w, "{header}")?;
    for c in chains {
        for i in 0..c.len() {
            let row: Vec<String> = c.draw(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{},{}", c.index, i, row.join(","))?;
        }
    }
    Ok(())
}
