//! Heavy-tailed coefficient priors for Bayesian linear regression.
//!
//! The crate provides the Student, log-Pareto-tailed normal (LPTN) and
//! constant-tailed normal (CTN) prior families, the exact joint log-posterior
//! of a linear regression in `(β, ν = ln σ)` coordinates with its gradient, a
//! Hamiltonian Monte Carlo sampler, sampler-independent oracles (closed forms
//! and 2-D quadrature) and numerical checks of how these priors behave as a
//! prior drifts into conflict with the data.

// coefficients are quoted at their published precision; `!(x > 0.0)` also rejects NaN
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod priors;
pub mod quadrature;
pub mod sampler;
pub mod specfun;

pub use error::{Error, Result};
pub use priors::{derive_ctn, derive_lptn, CoefficientPrior, DensityPoint, PriorFamily};
