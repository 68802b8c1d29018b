//! Nonparametric estimation of the jump-size density of a compound Poisson
//! process observed under additive Gaussian noise at unit time spacing.
//!
//! The observed increments are `X = Y + Z`, where `Y` is a Poisson(λ) sum of
//! i.i.d. jumps with density `f` and `Z` is standard normal. Since
//! `φ_X(t) = exp(-λ + λ φ_f(t)) exp(-t²/2)`, the jump density is recovered by
//! Fourier inversion of the distinguished logarithm of
//! `ψ(t) = φ_X(t) e^{λ} e^{t²/2}`, with the empirical characteristic function
//! plugged in for `φ_X` and a sinc-kernel cutoff at `|t| = 1/h`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command-line
//! front end and parallel experiment runners live in the `decompound` crate.
//!
//! Modules, bottom-up:
//!
//! - [`processes`]: model specification, jump laws, simulation of increments.
//! - [`charfun`]: frequency grids, empirical and analytic characteristic
//!   functions, Gaussian deconvolution.
//! - [`distlog`]: distinguished logarithm by continuous phase tracking.
//! - [`estimator`]: truncated plug-in estimator via trapezoid-rule inversion.
//! - [`experiments`]: Monte Carlo normality, well-definedness frequency, bias
//!   study, and the n = 5000 reproduction run.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod charfun;
pub mod distlog;
mod error;
pub mod estimator;
pub mod experiments;
pub mod fft;
pub mod processes;
pub mod rng;
pub mod stats;

pub use num_complex::Complex64;

pub use charfun::{deconvolve_gaussian, ecf, true_cf_x, ComplexSeries, FrequencyGrid, SeriesKind};
pub use distlog::{check_nonvanishing, unwrap_log, LogStatus, UnwrapOptions, UnwrappedLog};
pub use error::{Error, Result};
pub use estimator::{
    default_bandwidth, estimate_density, oracle_mean_estimate, DensityEstimate, EstimatorConfig,
    XGrid,
};
pub use processes::{
    simulate_increment, simulate_observations, CfDecay, Increment, JumpDistribution, JumpLaw,
    ModelSpec, ObservationSet,
};
