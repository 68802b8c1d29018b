//! Frequency grids and characteristic functions on them.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::processes::{validate_lambda, JumpLaw, ObservationSet};

/// Largest exponent accepted by [`deconvolve_gaussian`]; `exp` overflows past ~709.78.
pub const MAX_DECONVOLUTION_EXPONENT: f64 = 709.0;

/// Half-line frequency grid `0 = t_0 < t_1 < ...`.
///
/// Points are `t_j = η j` on the uniform lattice, optionally followed by one
/// terminal point that closes the grid exactly at a cutoff that is not a
/// lattice multiple.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    eta: f64,
    points: Vec<f64>,
    lattice_len: usize,
}

impl FrequencyGrid {
    /// `count` lattice points `0, η, ..., η (count-1)`.
    pub fn uniform(eta: f64, count: usize) -> Result<Self> {
        validate_eta(eta)?;
        if count == 0 {
            return Err(invalid("grid count", "must be positive"));
        }
        let points = (0..count).map(|j| eta * j as f64).collect();
        Ok(Self {
            eta,
            points,
            lattice_len: count,
        })
    }

    /// Lattice points in `[0, t_max]`, plus `t_max` itself when it is not a lattice point.
    pub fn up_to(eta: f64, t_max: f64) -> Result<Self> {
        validate_eta(eta)?;
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(invalid("cutoff", alloc::format!("{t_max} is not a finite nonnegative frequency")));
        }
        let ratio = t_max / eta;
        let mut last = libm::floor(ratio);
        // Snap ratios within rounding of an integer onto the lattice.
        if libm::fabs(ratio - libm::round(ratio)) <= 1e-9 * ratio.max(1.0) {
            last = libm::round(ratio);
        }
        let lattice_len = last as usize + 1;
        let mut points: Vec<f64> = (0..lattice_len).map(|j| eta * j as f64).collect();
        let remainder = t_max - eta * last;
        if remainder > 1e-9 * eta {
            points.push(t_max);
        }
        Ok(Self {
            eta,
            points,
            lattice_len,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points on the uniform lattice.
    pub fn lattice_len(&self) -> usize {
        self.lattice_len
    }

    /// Whether the grid ends with an off-lattice terminal point.
    pub fn has_terminal_point(&self) -> bool {
        self.points.len() > self.lattice_len
    }

    /// Largest frequency `T` on the grid.
    pub fn t_max(&self) -> f64 {
        *self.points.last().unwrap_or(&0.0)
    }

    /// Symmetric view `[-T, T]`: reflected positive points, then the half grid.
    pub fn mirrored(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.points[1..].iter().rev().map(|t| -t).collect();
        out.extend_from_slice(&self.points);
        out
    }

    /// Trapezoid weights for integrating over `[0, T]` on this grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut w = Vec::with_capacity(n);
        for j in 0..n {
            let left = if j > 0 { self.points[j] - self.points[j - 1] } else { 0.0 };
            let right = if j + 1 < n { self.points[j + 1] - self.points[j] } else { 0.0 };
            w.push(0.5 * (left + right));
        }
        w
    }
}

fn validate_eta(eta: f64) -> Result<()> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid("eta", alloc::format!("{eta} is not a positive finite step")));
    }
    Ok(())
}

/// What a [`ComplexSeries`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Ecf,
    TrueCf,
    Psi,
    UnwrappedLog,
}

impl SeriesKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SeriesKind::Ecf => "ecf",
            SeriesKind::TrueCf => "true_cf",
            SeriesKind::Psi => "psi",
            SeriesKind::UnwrappedLog => "unwrapped_log",
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Complex values on a half-line frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub kind: SeriesKind,
}

impl ComplexSeries {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>, kind: SeriesKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(
                "series",
                alloc::format!("{} values for {} grid points", values.len(), grid.len()),
            ));
        }
        Ok(Self { grid, values, kind })
    }

    /// Values on [`FrequencyGrid::mirrored`], using `v(-t) = conj v(t)`.
    pub fn mirrored_values(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.values[1..].iter().rev().map(|v| v.conj()).collect();
        out.extend_from_slice(&self.values);
        out
    }
}

/// Empirical characteristic function `(1/n) Σ_k exp(i t X_k)` at every grid point.
///
/// Direct summation, left to right over the observations.
pub fn ecf(obs: &ObservationSet, grid: &FrequencyGrid) -> ComplexSeries {
    let n = obs.values.len() as f64;
    let values = grid
        .points()
        .iter()
        .map(|&t| {
            let (mut re, mut im) = (0.0, 0.0);
            for &x in &obs.values {
                let (s, c) = libm::sincos(t * x);
                re += c;
                im += s;
            }
            Complex64::new(re / n, im / n)
        })
        .collect();
    ComplexSeries {
        grid: grid.clone(),
        values,
        kind: SeriesKind::Ecf,
    }
}

/// `φ_X(t) = exp(-λ + λ φ_f(t)) exp(-t²/2)`.
pub fn true_cf_x(lambda: f64, jump_law: &JumpLaw, grid: &FrequencyGrid) -> Result<ComplexSeries> {
    validate_lambda(lambda)?;
    let values = grid
        .points()
        .iter()
        .map(|&t| (lambda * (jump_law.cf(t) - 1.0) - 0.5 * t * t).exp())
        .collect();
    Ok(ComplexSeries {
        grid: grid.clone(),
        values,
        kind: SeriesKind::TrueCf,
    })
}

/// `ψ(t) = φ(t) e^{λ} e^{t²/2}`, with the multiplier taken as one `exp(λ + t²/2)`.
pub fn deconvolve_gaussian(series: &ComplexSeries, lambda: f64) -> Result<ComplexSeries> {
    validate_lambda(lambda)?;
    if !matches!(series.kind, SeriesKind::Ecf | SeriesKind::TrueCf) {
        return Err(invalid(
            "series kind",
            alloc::format!("cannot deconvolve a `{}` series", series.kind),
        ));
    }
    let mut values = Vec::with_capacity(series.values.len());
    for (&t, &v) in series.grid.points().iter().zip(&series.values) {
        let exponent = lambda + 0.5 * t * t;
        if exponent > MAX_DECONVOLUTION_EXPONENT {
            return Err(Error::GridBeyondCutoff { t });
        }
        values.push(v * libm::exp(exponent));
    }
    Ok(ComplexSeries {
        grid: series.grid.clone(),
        values,
        kind: SeriesKind::Psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn sample(values: &[f64]) -> ObservationSet {
        ObservationSet::from_values(values.to_vec()).unwrap()
    }

    #[test]
    fn grid_up_to_lattice_multiple_has_no_terminal_point() {
        let g = FrequencyGrid::up_to(1.0 / 512.0, 2.0).unwrap();
        assert_eq!(g.len(), 1025);
        assert!(!g.has_terminal_point());
        assert_eq!(g.t_max(), 2.0);
    }

    #[test]
    fn grid_up_to_off_lattice_appends_cutoff() {
        let g = FrequencyGrid::up_to(0.25, 1.1).unwrap();
        assert_eq!(g.points(), &[0.0, 0.25, 0.5, 0.75, 1.0, 1.1]);
        assert_eq!(g.lattice_len(), 5);
        let w = g.trapezoid_weights();
        let total: f64 = w.iter().sum();
        assert!((total - 1.1).abs() < 1e-15);
        assert!((w[0] - 0.125).abs() < 1e-15);
        assert!((w[4] - (0.125 + 0.05)).abs() < 1e-15);
        assert!((w[5] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn mirrored_grid_is_symmetric() {
        let g = FrequencyGrid::uniform(0.5, 4).unwrap();
        let m = g.mirrored();
        assert_eq!(m, vec![-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]);
        for (a, b) in m.iter().zip(m.iter().rev()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(FrequencyGrid::uniform(0.0, 3).is_err());
        assert!(FrequencyGrid::uniform(0.1, 0).is_err());
        assert!(FrequencyGrid::up_to(0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn ecf_at_zero_is_one() {
        let g = FrequencyGrid::uniform(0.1, 5).unwrap();
        let s = ecf(&sample(&[0.3, -2.0, 7.5]), &g);
        assert_eq!(s.values[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.kind, SeriesKind::Ecf);
    }

    #[test]
    fn ecf_single_point() {
        let g = FrequencyGrid::uniform(PI / 4.0, 2).unwrap();
        let s = ecf(&sample(&[2.0]), &g);
        assert!((s.values[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn ecf_symmetric_sample_is_cosine() {
        let g = FrequencyGrid::uniform(0.37, 40).unwrap();
        let s = ecf(&sample(&[1.0, -1.0]), &g);
        for (&t, v) in g.points().iter().zip(&s.values) {
            assert!((v.re - libm::cos(t)).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn true_cf_values() {
        let g = FrequencyGrid::uniform(1.0, 3).unwrap();
        let s = true_cf_x(1.0, &JumpLaw::StandardNormal, &g).unwrap();
        assert_eq!(s.values[0], Complex64::new(1.0, 0.0));
        // exp(-1 + e^{-1/2}) e^{-1/2}, evaluated to 30 digits independently.
        assert!((s.values[1].re - 0.409_233_516_741_968).abs() < 1e-15);
        for (&t, v) in g.points().iter().zip(&s.values) {
            assert!(v.norm() >= libm::exp(-2.0) * libm::exp(-0.5 * t * t));
        }
    }

    #[test]
    fn deconvolution_recovers_exp_lambda_cf() {
        let g = FrequencyGrid::up_to(0.01, 2.0).unwrap();
        let cf = true_cf_x(1.0, &JumpLaw::StandardNormal, &g).unwrap();
        let psi = deconvolve_gaussian(&cf, 1.0).unwrap();
        assert_eq!(psi.kind, SeriesKind::Psi);
        assert_eq!(psi.values[0], Complex64::new(libm::exp(1.0), 0.0));
        assert!((psi.values[0].re - core::f64::consts::E).abs() < 1e-15);
        for (&t, v) in g.points().iter().zip(&psi.values) {
            let expected = libm::exp(libm::exp(-0.5 * t * t));
            assert!((v.re - expected).abs() < 1e-12);
            assert_eq!(v.im, 0.0);
        }
        let m = psi.mirrored_values();
        let k = m.len();
        for i in 0..k {
            assert_eq!(m[i], m[k - 1 - i].conj());
        }
    }

    #[test]
    fn deconvolution_guards() {
        let g = FrequencyGrid::uniform(1.0, 40).unwrap();
        let cf = true_cf_x(1.0, &JumpLaw::Laplace, &g).unwrap();
        assert!(matches!(deconvolve_gaussian(&cf, 1.0), Err(Error::GridBeyondCutoff { .. })));
        let psi = deconvolve_gaussian(
            &true_cf_x(1.0, &JumpLaw::Laplace, &FrequencyGrid::uniform(1.0, 3).unwrap()).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(deconvolve_gaussian(&psi, 1.0).is_err());
    }
}
