use alloc::string::String;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("jump law `{law}` produced a non-finite draw")]
    NonFiniteSample { law: String },

    /// `λ + t²/2` leaves the exponent range of `f64`; keep the grid inside `|t| ≤ 1/h`.
    #[error("frequency t = {t} is beyond the representable deconvolution cutoff")]
    GridBeyondCutoff { t: f64 },

    /// ψ fell below the modulus floor, the distinguished logarithm is undefined.
    #[error("distinguished logarithm undefined: |psi| below floor at grid index {index}")]
    DistLogUndefined { index: usize },

    /// An argument increment came too close to ±π; the frequency step is too coarse.
    #[error("frequency step too coarse: ambiguous phase increment at grid index {index} (t = {t})")]
    GridTooCoarse { index: usize, t: f64 },

    #[error("truncation level {level} binds on an oracle estimate at x = {x}")]
    TruncationBinds { x: f64, level: f64 },

    #[error("{failed} of {reps} replicates had an undefined distinguished logarithm (limit {limit})")]
    TooManyVanished { failed: usize, reps: usize, limit: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
