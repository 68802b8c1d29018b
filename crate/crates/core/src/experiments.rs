//! Monte Carlo and oracle studies of the estimator.
//!
//! Replicate-level functions are exposed separately from the aggregating
//! reductions so a caller can evaluate replicates in any order or in
//! parallel and still obtain bit-identical reports: every replicate derives
//! its own seed from the master seed and its index, and aggregation runs in
//! index order.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::charfun::{deconvolve_gaussian, ecf, true_cf_x};
use crate::distlog::{check_nonvanishing, unwrap_log, LogStatus};
use crate::error::{invalid, Error, Result};
use crate::estimator::{estimate_density, oracle_mean_estimate, DensityEstimate, EstimatorConfig, XGrid};
use crate::processes::{simulate_observations, CfDecay, JumpLaw, ModelSpec};
use crate::rng::child_seed;
use crate::stats;

/// `ζ_n(h) = √n h^{-1} e^{-1/(2h²)}`.
pub fn zeta(n: usize, h: f64) -> f64 {
    libm::sqrt(n as f64) / h * libm::exp(-1.0 / (2.0 * h * h))
}

/// Limiting variance `e^{2λ} / (2π²λ²)` of the ζ-scaled centred estimator.
pub fn target_variance(lambda: f64) -> f64 {
    libm::exp(2.0 * lambda) / (2.0 * PI * PI * lambda * lambda)
}

/// One replicate of the normality study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityReplicate {
    pub index: usize,
    pub seed: u64,
    /// `f̂_nh(x)`; `None` when the distinguished logarithm failed.
    pub f_hat: Option<f64>,
    pub status: LogStatus,
}

/// Simulates one sample and evaluates the estimator at `x`.
///
/// Both failure modes of the logarithm (vanished ψ and an ambiguous phase
/// step) are returned as a failed replicate rather than an error.
pub fn normality_replicate(
    spec: &ModelSpec,
    config: &EstimatorConfig,
    x: f64,
    master_seed: u64,
    index: usize,
) -> Result<NormalityReplicate> {
    let seed = child_seed(master_seed, index as u64);
    let obs = simulate_observations(spec, seed)?;
    let point_config = config.clone().x_grid(XGrid::single(x));
    match estimate_density(&obs, spec.lambda, &point_config) {
        Ok(est) => Ok(NormalityReplicate {
            index,
            seed,
            f_hat: est.distlog_status.is_ok().then(|| est.f_hat[0]),
            status: est.distlog_status,
        }),
        Err(Error::GridTooCoarse { index: j, .. }) => Ok(NormalityReplicate {
            index,
            seed,
            f_hat: None,
            status: LogStatus::JumpSuspect(j),
        }),
        Err(e) => Err(e),
    }
}

/// Monte Carlo check of asymptotic normality at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub reps: usize,
    pub n: usize,
    pub lambda: f64,
    pub x: f64,
    pub h: f64,
    pub zeta: f64,
    pub replicates: Vec<NormalityReplicate>,
    /// `ζ (f̂ - mean f̂)` over the retained replicates, in replicate order.
    pub stats: Vec<f64>,
    /// Replicate mean of `f̂`, the surrogate for `E f̂_nh(x)`.
    pub mean_estimate: f64,
    pub sample_variance: f64,
    pub target_variance: f64,
    pub skewness: f64,
    /// Quartile-based skewness, computed without moments.
    pub quartile_skewness: f64,
    pub excess_kurtosis: f64,
    pub vanished_count: usize,
    pub jump_suspect_count: usize,
}

impl NormalityReport {
    /// Reduces replicates (any order) into a report.
    pub fn from_replicates(
        spec: &ModelSpec,
        config: &EstimatorConfig,
        x: f64,
        mut replicates: Vec<NormalityReplicate>,
    ) -> Result<Self> {
        replicates.sort_by_key(|r| r.index);
        let reps = replicates.len();
        let vanished_count = replicates
            .iter()
            .filter(|r| matches!(r.status, LogStatus::Vanished(_)))
            .count();
        let jump_suspect_count = replicates
            .iter()
            .filter(|r| matches!(r.status, LogStatus::JumpSuspect(_)))
            .count();
        let failed = vanished_count + jump_suspect_count;
        let limit = reps / 10;
        if failed > limit {
            return Err(Error::TooManyVanished { failed, reps, limit });
        }

        let values: Vec<f64> = replicates.iter().filter_map(|r| r.f_hat).collect();
        if values.len() < 2 {
            return Err(invalid("reps", "fewer than two usable replicates"));
        }
        let z = zeta(spec.n, config.h);
        let mean_estimate = stats::mean(&values);
        let centred: Vec<f64> = values.iter().map(|v| z * (v - mean_estimate)).collect();
        Ok(Self {
            reps,
            n: spec.n,
            lambda: spec.lambda,
            x,
            h: config.h,
            zeta: z,
            sample_variance: stats::sample_variance(&centred),
            target_variance: target_variance(spec.lambda),
            skewness: stats::skewness(&centred),
            quartile_skewness: stats::quartile_skewness(&centred),
            excess_kurtosis: stats::excess_kurtosis(&centred),
            stats: centred,
            mean_estimate,
            replicates,
            vanished_count,
            jump_suspect_count,
        })
    }

    /// `sample_variance / target_variance`.
    pub fn variance_ratio(&self) -> f64 {
        self.sample_variance / self.target_variance
    }
}

pub const MIN_NORMALITY_REPS: usize = 50;

/// Serial Monte Carlo normality study with `reps` replicates at point `x`.
pub fn mc_normality(
    spec: &ModelSpec,
    config: &EstimatorConfig,
    x: f64,
    reps: usize,
    seed: u64,
) -> Result<NormalityReport> {
    check_reps(reps, MIN_NORMALITY_REPS)?;
    let replicates = (0..reps)
        .map(|i| normality_replicate(spec, config, x, seed, i))
        .collect::<Result<Vec<_>>>()?;
    NormalityReport::from_replicates(spec, config, x, replicates)
}

/// Rejects replicate counts below `min`.
pub fn check_reps(reps: usize, min: usize) -> Result<()> {
    if reps < min {
        return Err(invalid("reps", alloc::format!("{reps} is below the minimum {min}")));
    }
    Ok(())
}

/// Which characteristic function feeds ψ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiSource {
    Empirical,
    /// The true `φ_X`; ψ never vanishes.
    Oracle,
}

/// Whether ψ on `[0, 1/h]` stays above the floor for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanishingProbe {
    pub vanished: bool,
    pub jump_suspect: bool,
    pub min_modulus: f64,
}

/// Seed of replicate `rep` at sample size `n`.
pub fn vanishing_seed(master_seed: u64, n: usize, rep: usize) -> u64 {
    child_seed(child_seed(master_seed, n as u64), rep as u64)
}

pub fn vanishing_probe(
    lambda: f64,
    jump_law: &JumpLaw,
    n: usize,
    config: &EstimatorConfig,
    source: PsiSource,
    seed: u64,
) -> Result<VanishingProbe> {
    let grid = config.frequency_grid()?;
    let cf = match source {
        PsiSource::Empirical => {
            let spec = ModelSpec::new(lambda, jump_law.clone(), n)?;
            ecf(&simulate_observations(&spec, seed)?, &grid)
        }
        PsiSource::Oracle => true_cf_x(lambda, jump_law, &grid)?,
    };
    let psi = deconvolve_gaussian(&cf, lambda)?;
    let scan = check_nonvanishing(&psi, config.unwrap.modulus_floor);
    let vanished = !scan.status.is_ok();
    let jump_suspect = !vanished
        && matches!(unwrap_log(&psi, &config.unwrap)?.status, LogStatus::JumpSuspect(_));
    Ok(VanishingProbe {
        vanished,
        jump_suspect,
        min_modulus: scan.min_modulus,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanishingRow {
    pub n: usize,
    pub reps: usize,
    pub vanished: usize,
    /// Non-vanished replicates whose phase tracking was ambiguous.
    pub jump_suspect: usize,
    pub median_min_modulus: f64,
}

impl VanishingRow {
    pub fn from_probes(n: usize, probes: &[VanishingProbe]) -> Self {
        let mut mins: Vec<f64> = probes.iter().map(|p| p.min_modulus).collect();
        mins.sort_by(f64::total_cmp);
        Self {
            n,
            reps: probes.len(),
            vanished: probes.iter().filter(|p| p.vanished).count(),
            jump_suspect: probes.iter().filter(|p| p.jump_suspect).count(),
            median_min_modulus: if mins.is_empty() { f64::NAN } else { stats::quantile_sorted(&mins, 0.5) },
        }
    }

    pub fn vanished_fraction(&self) -> f64 {
        self.vanished as f64 / self.reps as f64
    }

    pub fn jump_suspect_fraction(&self) -> f64 {
        self.jump_suspect as f64 / self.reps as f64
    }
}

/// Vanishing frequency per sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct VanishingTable {
    pub lambda: f64,
    pub h: f64,
    pub source: PsiSource,
    pub rows: Vec<VanishingRow>,
}

impl VanishingTable {
    /// Whether vanished fractions are nonincreasing in row order, allowing at
    /// most `allowed` increases each within `se_multiple` standard errors of
    /// the difference of two binomial proportions.
    pub fn is_nonincreasing(&self, se_multiple: f64, allowed: usize) -> bool {
        trend_nonincreasing(
            self.rows.iter().map(|r| (r.vanished_fraction(), r.reps)),
            se_multiple,
            allowed,
        )
    }

    /// Same check on the combined failure rate (vanished or ambiguous phase).
    pub fn failures_nonincreasing(&self, se_multiple: f64, allowed: usize) -> bool {
        trend_nonincreasing(
            self.rows
                .iter()
                .map(|r| ((r.vanished + r.jump_suspect) as f64 / r.reps as f64, r.reps)),
            se_multiple,
            allowed,
        )
    }
}

fn trend_nonincreasing(
    fractions: impl Iterator<Item = (f64, usize)>,
    se_multiple: f64,
    allowed: usize,
) -> bool {
    let rows: Vec<(f64, usize)> = fractions.collect();
    let mut inversions = 0;
    for pair in rows.windows(2) {
        let ((p0, r0), (p1, r1)) = (pair[0], pair[1]);
        if p1 > p0 {
            let se = libm::sqrt(p0 * (1.0 - p0) / r0 as f64 + p1 * (1.0 - p1) / r1 as f64);
            if p1 - p0 > se_multiple * se {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= allowed
}

pub const MIN_VANISHING_REPS: usize = 100;

/// Serial vanishing-frequency study over sample sizes `ns`.
pub fn vanishing_frequency(
    lambda: f64,
    jump_law: &JumpLaw,
    ns: &[usize],
    config: &EstimatorConfig,
    reps: usize,
    seed: u64,
    source: PsiSource,
) -> Result<VanishingTable> {
    check_reps(reps, MIN_VANISHING_REPS)?;
    config.validate()?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let probes = (0..reps)
            .map(|r| vanishing_probe(lambda, jump_law, n, config, source, vanishing_seed(seed, n, r)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(VanishingRow::from_probes(n, &probes));
    }
    Ok(VanishingTable {
        lambda,
        h: config.h,
        source,
        rows,
    })
}

/// Oracle bias against the claimed rate, per bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub law: String,
    pub decay: CfDecay,
    pub lambda: f64,
    pub x: f64,
    pub h_values: Vec<f64>,
    pub f_raw: Vec<f64>,
    pub f_true: f64,
    /// `f_raw(x) - f(x)`.
    pub bias: Vec<f64>,
    pub rates: Vec<f64>,
    /// `|bias| / rate`.
    pub rate_ratios: Vec<f64>,
}

impl BiasReport {
    /// `max(rate_ratios) / min(rate_ratios)`.
    pub fn ratio_spread(&self) -> f64 {
        let max = self.rate_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.rate_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

pub fn bias_study(
    jump_law: &JumpLaw,
    lambda: f64,
    x: f64,
    h_values: &[f64],
    base: &EstimatorConfig,
) -> Result<BiasReport> {
    let f_true = jump_law
        .density(x)
        .ok_or_else(|| invalid("jump law", alloc::format!("`{}` has no density", jump_law.name())))?;
    let decay = jump_law.cf_decay().ok_or_else(|| {
        invalid("jump law", alloc::format!("`{}` has no decay class", jump_law.name()))
    })?;
    if h_values.is_empty() || h_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("h values", "must be nonempty and strictly increasing"));
    }
    let mut f_raw = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let config = base.clone().bandwidth(h).x_grid(XGrid::single(x));
        f_raw.push(oracle_mean_estimate(lambda, jump_law, &config)?.f_raw[0]);
    }
    let bias: Vec<f64> = f_raw.iter().map(|f| f - f_true).collect();
    let rates: Vec<f64> = h_values.iter().map(|&h| decay.bias_rate(h)).collect();
    let rate_ratios = bias.iter().zip(&rates).map(|(b, r)| libm::fabs(*b) / r).collect();
    Ok(BiasReport {
        law: jump_law.name().to_string(),
        decay,
        lambda,
        x,
        h_values: h_values.to_vec(),
        f_raw,
        f_true,
        bias,
        rates,
        rate_ratios,
    })
}

pub const FIGURE_LAMBDA: f64 = 1.0;
pub const FIGURE_N: usize = 5000;
pub const FIGURE_H: f64 = 0.5;
pub const DEFAULT_FIGURE_SEED: u64 = 1;

/// Estimate and true density behind the n = 5000 normal-jump figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub seed: u64,
    pub estimate: DensityEstimate,
    pub f_true: Vec<f64>,
}

impl FigureData {
    pub fn mean_abs_error(&self, lo: f64, hi: f64) -> Option<f64> {
        self.estimate
            .mean_abs_error(|x| JumpLaw::StandardNormal.density(x).unwrap_or(0.0), lo, hi)
    }
}

pub fn figure_spec() -> ModelSpec {
    ModelSpec {
        lambda: FIGURE_LAMBDA,
        jump_law: JumpLaw::StandardNormal,
        n: FIGURE_N,
    }
}

/// λ = 1, standard-normal jumps, n = 5000, h = 0.5, x ∈ [-4, 4] step 0.02.
pub fn figure_config() -> Result<EstimatorConfig> {
    Ok(EstimatorConfig::new(FIGURE_N, FIGURE_H)?.x_grid(XGrid::default()))
}

pub fn reproduce_figure(seed: u64) -> Result<FigureData> {
    let spec = figure_spec();
    let obs = simulate_observations(&spec, seed)?;
    let estimate = estimate_density(&obs, spec.lambda, &figure_config()?)?;
    let f_true = estimate
        .x
        .iter()
        .map(|&x| spec.jump_law.density(x).unwrap_or(0.0))
        .collect();
    Ok(FigureData {
        seed,
        estimate,
        f_true,
    })
}
