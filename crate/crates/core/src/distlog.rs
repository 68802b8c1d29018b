//! Distinguished logarithm of ψ by continuous phase tracking.
//!
//! The branch is anchored at `t = 0`, where `ψ(0) = e^{λ}` is real and
//! positive, and extended outward along the half grid by choosing, at every
//! step, the `2π` shift of the principal argument that keeps the increment
//! from the previous point in `(-π, π]`. The negative half follows from
//! `Log ψ(-t) = conj Log ψ(t)`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::charfun::{ComplexSeries, FrequencyGrid, SeriesKind};
use crate::error::{invalid, Error, Result};

/// Default absolute floor on `|ψ|` below which the logarithm is declared undefined.
pub const DEFAULT_MODULUS_FLOOR: f64 = 1e-8;
/// Default bound on `|Δ arg|` between neighbours, `0.9 π`.
pub const DEFAULT_JUMP_THRESHOLD: f64 = 0.9 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnwrapOptions {
    /// Increments with magnitude above this raise [`LogStatus::JumpSuspect`]. Must lie in `(0, π)`.
    pub jump_threshold: f64,
    pub modulus_floor: f64,
}

impl Default for UnwrapOptions {
    fn default() -> Self {
        Self {
            jump_threshold: DEFAULT_JUMP_THRESHOLD,
            modulus_floor: DEFAULT_MODULUS_FLOOR,
        }
    }
}

impl UnwrapOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.jump_threshold > 0.0 && self.jump_threshold < PI) {
            return Err(invalid(
                "jump_threshold",
                alloc::format!("{} is outside (0, pi)", self.jump_threshold),
            ));
        }
        if !(self.modulus_floor.is_finite() && self.modulus_floor >= 0.0) {
            return Err(invalid(
                "modulus_floor",
                alloc::format!("{} is not a finite nonnegative floor", self.modulus_floor),
            ));
        }
        Ok(())
    }
}

/// Outcome of tracking the logarithm along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogStatus {
    Ok,
    /// `|ψ|` fell below the floor at this grid index.
    Vanished(usize),
    /// The argument increment into this grid index exceeded the jump threshold.
    JumpSuspect(usize),
}

impl LogStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, LogStatus::Ok)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            LogStatus::Ok => "ok",
            LogStatus::Vanished(_) => "vanished",
            LogStatus::JumpSuspect(_) => "jump_suspect",
        }
    }

    pub fn index(&self) -> Option<usize> {
        match *self {
            LogStatus::Ok => None,
            LogStatus::Vanished(i) | LogStatus::JumpSuspect(i) => Some(i),
        }
    }
}

impl core::fmt::Display for LogStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.index() {
            None => f.write_str(self.tag()),
            Some(i) => write!(f, "{}({i})", self.tag()),
        }
    }
}

/// Distinguished logarithm on a half grid.
///
/// On failure, `log_values` and `branch_shifts` cover the prefix processed
/// before the failing index.
#[derive(Debug, Clone, PartialEq)]
pub struct UnwrappedLog {
    pub grid: FrequencyGrid,
    /// `log|ψ| + i·arg`, with the argument on the continuous branch.
    pub log_values: Vec<Complex64>,
    /// Integer `k_j` with `arg_j = principal_arg(ψ_j) + 2π k_j`.
    pub branch_shifts: Vec<i64>,
    /// `log ψ(0)`, which is `λ` for a deconvolved characteristic function.
    pub base_value: f64,
    pub min_modulus: f64,
    pub status: LogStatus,
}

impl UnwrappedLog {
    /// Number of grid steps at which the cumulative `2π` shift changed.
    pub fn correction_count(&self) -> usize {
        self.branch_shifts.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Values on the mirrored grid `[-T, T]`.
    pub fn mirrored_values(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.log_values.iter().skip(1).rev().map(|v| v.conj()).collect();
        out.extend_from_slice(&self.log_values);
        out
    }

    /// Converts a failed status into the matching error.
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            LogStatus::Ok => Ok(self),
            LogStatus::Vanished(index) => Err(Error::DistLogUndefined { index }),
            LogStatus::JumpSuspect(index) => Err(Error::GridTooCoarse {
                index,
                t: self.grid.points()[index],
            }),
        }
    }

    /// Re-exposes the result as a series tagged `unwrapped_log`.
    pub fn as_series(&self) -> Option<ComplexSeries> {
        if !self.status.is_ok() {
            return None;
        }
        ComplexSeries::new(self.grid.clone(), self.log_values.clone(), SeriesKind::UnwrappedLog).ok()
    }
}

/// Result of a modulus scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonVanishing {
    pub status: LogStatus,
    pub min_modulus: f64,
}

/// First index where `|ψ_j| < modulus_floor`, together with the smallest modulus seen.
pub fn check_nonvanishing(psi: &ComplexSeries, modulus_floor: f64) -> NonVanishing {
    let mut min_modulus = f64::INFINITY;
    let mut status = LogStatus::Ok;
    for (j, v) in psi.values.iter().enumerate() {
        let m = v.norm();
        if m < min_modulus {
            min_modulus = m;
        }
        if m < modulus_floor && status.is_ok() {
            status = LogStatus::Vanished(j);
        }
    }
    NonVanishing { status, min_modulus }
}

/// Tracks the distinguished logarithm of `psi` outward from `t = 0`.
pub fn unwrap_log(psi: &ComplexSeries, options: &UnwrapOptions) -> Result<UnwrappedLog> {
    options.validate()?;
    if psi.kind != SeriesKind::Psi {
        return Err(invalid(
            "series kind",
            alloc::format!("expected psi, got `{}`", psi.kind),
        ));
    }
    let first = psi.values[0];
    if !(first.re > 0.0 && libm::fabs(first.im) <= 1e-12 * first.re) {
        return Err(invalid(
            "psi(0)",
            alloc::format!("{first} is not real and positive"),
        ));
    }

    let base_value = libm::log(first.re);
    let mut log_values = Vec::with_capacity(psi.values.len());
    let mut branch_shifts = Vec::with_capacity(psi.values.len());
    let mut status = LogStatus::Ok;
    if first.re < options.modulus_floor {
        status = LogStatus::Vanished(0);
    } else {
        log_values.push(Complex64::new(base_value, 0.0));
        branch_shifts.push(0);
    }

    let mut min_modulus = first.re;
    let mut prev_arg = 0.0;
    let tracked = if status.is_ok() { psi.values.len() } else { 0 };
    for (j, v) in psi.values.iter().enumerate().take(tracked).skip(1) {
        let modulus = v.norm();
        min_modulus = min_modulus.min(modulus);
        if modulus < options.modulus_floor || modulus == 0.0 {
            status = LogStatus::Vanished(j);
            break;
        }
        let principal = libm::atan2(v.im, v.re);
        let k = libm::round((prev_arg - principal) / TAU);
        let arg = principal + TAU * k;
        if libm::fabs(arg - prev_arg) > options.jump_threshold {
            status = LogStatus::JumpSuspect(j);
            break;
        }
        log_values.push(Complex64::new(libm::log(modulus), arg));
        branch_shifts.push(k as i64);
        prev_arg = arg;
    }

    // Finish the modulus survey past an early stop.
    for v in &psi.values[log_values.len().max(1)..] {
        min_modulus = min_modulus.min(v.norm());
    }

    Ok(UnwrappedLog {
        grid: psi.grid.clone(),
        log_values,
        branch_shifts,
        base_value,
        min_modulus,
        status,
    })
}
