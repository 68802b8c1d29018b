//! Truncated plug-in estimator of the jump density.
//!
//! ```text
//! f_nh(x) = 1/(2πλ) ∫_{-1/h}^{1/h} e^{-itx} Log ψ(t) dt,   ψ(t) = φ_emp(t) e^{λ} e^{t²/2}
//! f̂_nh(x) = max(-M_n, min(M_n, f_nh(x)))
//! ```
//!
//! The sinc kernel enters only through its Fourier transform `1_{[-1,1]}`,
//! i.e. as the hard cutoff `|t| ≤ 1/h`. The integral is computed with the
//! trapezoid rule on the half line and doubled through Hermitian symmetry,
//! either by direct summation at arbitrary `x` or by one power-of-two FFT on
//! the conjugate grid `x_k = x_min + 2πk/(Nη)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::charfun::{deconvolve_gaussian, ecf, true_cf_x, ComplexSeries, FrequencyGrid};
use crate::distlog::{unwrap_log, LogStatus, UnwrapOptions, UnwrappedLog};
use crate::error::{invalid, Error, Result};
use crate::fft::fft_forward;
use crate::processes::{validate_lambda, JumpLaw, ObservationSet};

pub const DEFAULT_ETA: f64 = 1.0 / 512.0;
pub const DEFAULT_FFT_SIZE: usize = 4096;
pub const DEFAULT_BETA: f64 = 0.45;
/// `M_n = C_M log n`.
pub const DEFAULT_C_M: f64 = 10.0;

/// `h = c_h (log n)^{-β}` with `0 < β < 1/2`.
pub fn default_bandwidth(n: usize, beta: f64, c_h: f64) -> Result<f64> {
    if n < 3 {
        return Err(invalid("n", alloc::format!("bandwidth rule needs n >= 3, got {n}")));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(invalid(
            "beta",
            alloc::format!("{beta} violates the bandwidth condition β<1/2 (and β>0)"),
        ));
    }
    if !(c_h.is_finite() && c_h > 0.0) {
        return Err(invalid("c_h", alloc::format!("{c_h} is not a positive constant")));
    }
    Ok(c_h * libm::pow(libm::log(n as f64), -beta))
}

/// The constant `c_h` for which the bandwidth rule returns `h` at sample size `n`.
pub fn calibrate_c_h(n: usize, beta: f64, h: f64) -> f64 {
    h * libm::pow(libm::log(n as f64), beta)
}

/// `M_n = c_m log n`.
pub fn truncation_level(n: usize, c_m: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", "truncation level C log n needs n >= 2"));
    }
    if !(c_m.is_finite() && c_m > 0.0) {
        return Err(invalid("c_m", alloc::format!("{c_m} is not a positive constant")));
    }
    Ok(c_m * libm::log(n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthRule {
    pub beta: f64,
    pub c_h: f64,
}

/// Where the estimate is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum XGrid {
    /// Arbitrary points, direct summation.
    Points(Vec<f64>),
    /// `x_k = x_min + 2πk/(Nη)`, `k = 0..N`, via FFT.
    Fft { x_min: f64 },
}

impl XGrid {
    /// `min, min + step, ...` up to `max` inclusive (within rounding).
    pub fn linspace(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step > 0.0 && max >= min) {
            return Err(invalid("x grid", alloc::format!("bad range [{min}, {max}] step {step}")));
        }
        let count = libm::floor((max - min) / step + 1e-9) as usize + 1;
        Ok(XGrid::Points((0..count).map(|k| min + step * k as f64).collect()))
    }

    pub fn single(x: f64) -> Self {
        XGrid::Points(vec![x])
    }
}

impl Default for XGrid {
    fn default() -> Self {
        XGrid::Points((0..=400).map(|k| (k as f64 - 200.0) / 50.0).collect())
    }
}

/// Estimator hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Bandwidth; frequencies `|t| ≤ 1/h` are used.
    pub h: f64,
    /// Set when `h` came from [`default_bandwidth`].
    pub bandwidth_rule: Option<BandwidthRule>,
    /// Truncation level `M_n`.
    pub truncation: f64,
    /// Set when the truncation level came from [`truncation_level`].
    pub c_m: Option<f64>,
    /// Frequency step η.
    pub eta: f64,
    /// FFT length `N`; a power of two.
    pub fft_size: usize,
    pub x_grid: XGrid,
    pub unwrap: UnwrapOptions,
}

impl EstimatorConfig {
    /// Bandwidth `h` with defaults elsewhere and `M_n = 10 log n`.
    pub fn new(n: usize, h: f64) -> Result<Self> {
        let config = Self {
            h,
            bandwidth_rule: None,
            truncation: truncation_level(n, DEFAULT_C_M)?,
            c_m: Some(DEFAULT_C_M),
            eta: DEFAULT_ETA,
            fft_size: DEFAULT_FFT_SIZE,
            x_grid: XGrid::default(),
            unwrap: UnwrapOptions::default(),
        };
        config.validate()?;
        Ok(config)
    }

    /// Bandwidth from `h = c_h (log n)^{-β}`.
    pub fn with_rule(n: usize, beta: f64, c_h: f64) -> Result<Self> {
        let h = default_bandwidth(n, beta, c_h)?;
        let mut config = Self::new(n, h)?;
        config.bandwidth_rule = Some(BandwidthRule { beta, c_h });
        Ok(config)
    }

    pub fn eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn fft_size(mut self, n: usize) -> Self {
        self.fft_size = n;
        self
    }

    pub fn x_grid(mut self, grid: XGrid) -> Self {
        self.x_grid = grid;
        self
    }

    pub fn bandwidth(mut self, h: f64) -> Self {
        self.h = h;
        self.bandwidth_rule = None;
        self
    }

    pub fn truncation(mut self, level: f64) -> Self {
        self.truncation = level;
        self.c_m = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(invalid("h", alloc::format!("{} is not a positive bandwidth", self.h)));
        }
        if let Some(rule) = self.bandwidth_rule {
            if !(rule.beta > 0.0 && rule.beta < 0.5) {
                return Err(invalid(
                    "beta",
                    alloc::format!("{} violates the bandwidth condition β<1/2", rule.beta),
                ));
            }
        }
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return Err(invalid(
                "truncation",
                alloc::format!("{} is not a positive level", self.truncation),
            ));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(invalid("eta", alloc::format!("{} is not a positive step", self.eta)));
        }
        if !self.fft_size.is_power_of_two() {
            return Err(invalid(
                "fft_size",
                alloc::format!("{} is not a power of two", self.fft_size),
            ));
        }
        match &self.x_grid {
            XGrid::Points(xs) => {
                if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("x grid", "needs at least one finite point"));
                }
            }
            XGrid::Fft { x_min } => {
                if !x_min.is_finite() {
                    return Err(invalid("x grid", "x_min is not finite"));
                }
            }
        }
        self.unwrap.validate()
    }

    /// Half grid `[0, 1/h]` with step η.
    pub fn frequency_grid(&self) -> Result<FrequencyGrid> {
        FrequencyGrid::up_to(self.eta, 1.0 / self.h)
    }
}

/// Output of the estimator on an x grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub x: Vec<f64>,
    /// Truncated values `f̂_nh`.
    pub f_hat: Vec<f64>,
    /// Values before truncation `f_nh`; zero when the logarithm is undefined.
    pub f_raw: Vec<f64>,
    pub truncation_hit: Vec<bool>,
    pub config: EstimatorConfig,
    pub lambda: f64,
    /// Sample size; `None` for oracle estimates.
    pub n: Option<usize>,
    pub distlog_status: LogStatus,
    pub min_modulus: f64,
}

impl DensityEstimate {
    /// Mean of `|f̂(x) - truth(x)|` over grid points with `lo <= x <= hi`.
    pub fn mean_abs_error(&self, truth: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
        let (sum, count) = self
            .x
            .iter()
            .zip(&self.f_hat)
            .filter(|(x, _)| **x >= lo - 1e-12 && **x <= hi + 1e-12)
            .fold((0.0, 0usize), |(s, c), (x, f)| (s + libm::fabs(f - truth(*x)), c + 1));
        (count > 0).then(|| sum / count as f64)
    }
}

/// Plug-in estimate from a sample.
///
/// A vanished ψ yields a zero estimate with the failure recorded in
/// `distlog_status`; an ambiguous phase step is an error.
pub fn estimate_density(
    obs: &ObservationSet,
    lambda: f64,
    config: &EstimatorConfig,
) -> Result<DensityEstimate> {
    validate_lambda(lambda)?;
    config.validate()?;
    if obs.is_empty() {
        return Err(invalid("observations", "empty sample"));
    }
    let grid = config.frequency_grid()?;
    let psi = deconvolve_gaussian(&ecf(obs, &grid), lambda)?;
    estimate_from_psi(&psi, lambda, config, Some(obs.len()))
}

/// The estimator with `φ_emp` replaced by the true `φ_X`; isolates the bias.
pub fn oracle_mean_estimate(
    lambda: f64,
    jump_law: &JumpLaw,
    config: &EstimatorConfig,
) -> Result<DensityEstimate> {
    validate_lambda(lambda)?;
    config.validate()?;
    if jump_law.density(0.0).is_none() {
        return Err(invalid(
            "jump law",
            alloc::format!("`{}` has no density", jump_law.name()),
        ));
    }
    let grid = config.frequency_grid()?;
    let psi = deconvolve_gaussian(&true_cf_x(lambda, jump_law, &grid)?, lambda)?;
    let estimate = estimate_from_psi(&psi, lambda, config, None)?;
    if let Some(i) = estimate.truncation_hit.iter().position(|&hit| hit) {
        return Err(Error::TruncationBinds {
            x: estimate.x[i],
            level: config.truncation,
        });
    }
    Ok(estimate)
}

/// Shared tail of the pipeline: distinguished logarithm, inversion, truncation.
pub fn estimate_from_psi(
    psi: &ComplexSeries,
    lambda: f64,
    config: &EstimatorConfig,
    n: Option<usize>,
) -> Result<DensityEstimate> {
    let log = unwrap_log(psi, &config.unwrap)?;
    let (x, f_raw) = match log.status {
        LogStatus::JumpSuspect(index) => {
            return Err(Error::GridTooCoarse {
                index,
                t: psi.grid.points()[index],
            })
        }
        LogStatus::Vanished(_) => {
            let x = match &config.x_grid {
                XGrid::Points(xs) => xs.clone(),
                XGrid::Fft { x_min } => fft_x_grid(*x_min, config.eta, config.fft_size),
            };
            let zeros = vec![0.0; x.len()];
            (x, zeros)
        }
        LogStatus::Ok => match &config.x_grid {
            XGrid::Points(xs) => (xs.clone(), invert_direct(&log, lambda, xs)),
            XGrid::Fft { x_min } => invert_fft(&log, lambda, *x_min, config.fft_size)?,
        },
    };

    let m = config.truncation;
    let f_hat = f_raw.iter().map(|f| f.clamp(-m, m)).collect();
    let truncation_hit = f_raw.iter().map(|f| libm::fabs(*f) > m).collect();
    Ok(DensityEstimate {
        x,
        f_hat,
        f_raw,
        truncation_hit,
        config: config.clone(),
        lambda,
        n,
        distlog_status: log.status,
        min_modulus: log.min_modulus,
    })
}

/// `x_k = x_min + 2πk/(Nη)` for `k = 0..N`.
pub fn fft_x_grid(x_min: f64, eta: f64, fft_size: usize) -> Vec<f64> {
    let dx = 2.0 * PI / (fft_size as f64 * eta);
    (0..fft_size).map(|k| x_min + dx * k as f64).collect()
}

/// `(1/πλ) Σ_j w_j Re[e^{-i t_j x} L_j]` at each `x`, by direct summation.
pub fn invert_direct(log: &UnwrappedLog, lambda: f64, xs: &[f64]) -> Vec<f64> {
    let weights = log.grid.trapezoid_weights();
    let scale = 1.0 / (PI * lambda);
    xs.iter()
        .map(|&x| {
            let mut acc = 0.0;
            for ((&t, &w), l) in log.grid.points().iter().zip(&weights).zip(&log.log_values) {
                let (s, c) = libm::sincos(t * x);
                acc += w * (c * l.re + s * l.im);
            }
            acc * scale
        })
        .collect()
}

/// FFT evaluation of the trapezoid sum on [`fft_x_grid`].
///
/// Lattice nodes go through one length-`N` transform (zero padded); an
/// off-lattice terminal node is added directly at each `x_k`.
pub fn invert_fft(
    log: &UnwrappedLog,
    lambda: f64,
    x_min: f64,
    fft_size: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = &log.grid;
    let lattice = grid.lattice_len();
    if lattice > fft_size {
        return Err(invalid(
            "fft_size",
            alloc::format!("{fft_size} is smaller than the {lattice} frequency nodes in [0, 1/h]"),
        ));
    }
    let weights = grid.trapezoid_weights();
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    for j in 0..lattice {
        let t = grid.points()[j];
        let (s, c) = libm::sincos(-t * x_min);
        buf[j] = log.log_values[j] * weights[j] * Complex64::new(c, s);
    }
    fft_forward(&mut buf)?;

    let xs = fft_x_grid(x_min, grid.eta(), fft_size);
    let scale = 1.0 / (PI * lambda);
    let terminal = grid
        .has_terminal_point()
        .then(|| (grid.t_max(), weights[lattice], log.log_values[lattice]));
    let values = xs
        .iter()
        .zip(&buf)
        .map(|(&x, s)| {
            let mut re = s.re;
            if let Some((t, w, l)) = terminal {
                let (sn, c) = libm::sincos(t * x);
                re += w * (c * l.re + sn * l.im);
            }
            re * scale
        })
        .collect();
    Ok((xs, values))
}

/// `(1/2πλ) Σ w_j e^{-i t_j x} L(t_j)` over the mirrored grid `[-T, T]`.
///
/// The imaginary part is the numerical residue that the half-line path
/// discards; the real part matches [`invert_direct`].
pub fn invert_full_grid(log: &UnwrappedLog, lambda: f64, x: f64) -> Complex64 {
    let half = log.grid.trapezoid_weights();
    let mut weights: Vec<f64> = half[1..].iter().rev().copied().collect();
    weights.push(2.0 * half[0]);
    weights.extend_from_slice(&half[1..]);
    let points = log.grid.mirrored();
    let values = log.mirrored_values();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&t, &w), l) in points.iter().zip(&weights).zip(&values) {
        let (s, c) = libm::sincos(-t * x);
        acc += l * Complex64::new(c, s) * w;
    }
    acc / (2.0 * PI * lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{simulate_observations, ModelSpec};
    use core::f64::consts::E;

    #[test]
    fn bandwidth_rule_closed_form() {
        // n = e^e gives log n = e.
        let n_ee = libm::exp(E);
        assert!((n_ee - 15.154).abs() < 1e-3);
        for beta in [0.1, 0.25, 0.45] {
            let h = 1.0 * libm::pow(libm::log(n_ee), -beta);
            assert!((h - libm::exp(-beta)).abs() < 1e-14);
        }
        let c_h = calibrate_c_h(5000, 0.45, 0.5);
        assert!((c_h - 1.311_002_224_349_863).abs() < 1e-12);
        assert!((default_bandwidth(5000, 0.45, c_h).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_rule_rejects_bad_input() {
        assert!(default_bandwidth(5000, 0.6, 1.0).is_err());
        assert!(default_bandwidth(5000, 0.5, 1.0).is_err());
        assert!(default_bandwidth(2, 0.3, 1.0).is_err());
        assert!(default_bandwidth(5000, 0.3, 0.0).is_err());
        assert!(EstimatorConfig::with_rule(5000, 0.6, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        let c = EstimatorConfig::new(5000, 0.5).unwrap();
        assert!((c.truncation - 10.0 * libm::log(5000.0)).abs() < 1e-12);
        assert!(c.clone().fft_size(3000).validate().is_err());
        assert!(c.clone().eta(0.0).validate().is_err());
        assert!(c.clone().bandwidth(-1.0).validate().is_err());
        assert!(c.clone().x_grid(XGrid::Points(vec![])).validate().is_err());
        assert!(EstimatorConfig::new(1, 0.5).is_err());
    }

    #[test]
    fn default_x_grid_has_401_points() {
        let XGrid::Points(xs) = XGrid::default() else { panic!() };
        assert_eq!(xs.len(), 401);
        assert_eq!(xs[0], -4.0);
        assert_eq!(xs[200], 0.0);
        assert_eq!(xs[400], 4.0);
        let XGrid::Points(ys) = XGrid::linspace(-4.0, 4.0, 0.02).unwrap() else { panic!() };
        assert_eq!(ys.len(), 401);
    }

    #[test]
    fn clamp_law_holds() {
        let spec = ModelSpec::new(1.0, JumpLaw::StandardNormal, 300).unwrap();
        let obs = simulate_observations(&spec, 5).unwrap();
        let config = EstimatorConfig::new(300, 0.5).unwrap().truncation(0.2);
        let est = estimate_density(&obs, 1.0, &config).unwrap();
        assert!(est.truncation_hit.iter().any(|h| *h));
        for ((raw, hat), hit) in est.f_raw.iter().zip(&est.f_hat).zip(&est.truncation_hit) {
            let mut sorted = [-0.2, *raw, 0.2];
            sorted.sort_by(f64::total_cmp);
            assert_eq!(*hat, sorted[1]);
            assert!(hat.abs() <= 0.2);
            assert_eq!(*hit, raw.abs() > 0.2);
        }
    }

    #[test]
    fn oracle_rejects_binding_truncation() {
        let config = EstimatorConfig::new(5000, 0.5).unwrap().truncation(0.1);
        let err = oracle_mean_estimate(1.0, &JumpLaw::StandardNormal, &config).unwrap_err();
        assert!(matches!(err, Error::TruncationBinds { .. }));
    }

    #[test]
    fn vanished_psi_gives_zero_estimate() {
        let grid = FrequencyGrid::up_to(0.5, 2.0).unwrap();
        let mut values = vec![Complex64::new(1.0, 0.0); grid.len()];
        values[2] = Complex64::new(0.0, 0.0);
        let psi = ComplexSeries::new(grid, values, crate::SeriesKind::Psi).unwrap();
        let config = EstimatorConfig::new(100, 0.5).unwrap().eta(0.5);
        let est = estimate_from_psi(&psi, 1.0, &config, Some(100)).unwrap();
        assert_eq!(est.distlog_status, LogStatus::Vanished(2));
        assert!(est.f_raw.iter().all(|v| *v == 0.0));
        assert!(est.f_hat.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fft_too_small_is_rejected() {
        let config = EstimatorConfig::new(5000, 0.1)
            .unwrap()
            .x_grid(XGrid::Fft { x_min: -4.0 });
        let err = oracle_mean_estimate(1.0, &JumpLaw::StandardNormal, &config).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "fft_size", .. }));
    }
}
