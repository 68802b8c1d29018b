//! Simulation of the observed increments `X_i = Y_i + Z_i`.
//!
//! `Y_i` is a Poisson(λ) sum of i.i.d. jumps (the empty sum is zero) and
//! `Z_i` is standard normal, independent of `Y_i`. Observations are taken at
//! unit spacing, so each increment is one such draw.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::rng::Substreams;

/// Largest intensity the inversion-by-search Poisson sampler accepts.
pub const MAX_LAMBDA: f64 = 30.0;

/// Tail decay class of a jump characteristic function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CfDecay {
    /// `|φ_f(t)| = O(exp(-|t|^α))`.
    Supersmooth { alpha: f64 },
    /// `|φ_f(t)| = O(|t|^{-γ})`.
    OrdinarySmooth { gamma: f64 },
}

impl CfDecay {
    /// Bias rate at bandwidth `h`: `h^{α-1} e^{-1/h^α}` or `h^{γ-1}`.
    pub fn bias_rate(&self, h: f64) -> f64 {
        match *self {
            CfDecay::Supersmooth { alpha } => {
                libm::pow(h, alpha - 1.0) * libm::exp(-1.0 / libm::pow(h, alpha))
            }
            CfDecay::OrdinarySmooth { gamma } => libm::pow(h, gamma - 1.0),
        }
    }
}

impl fmt::Display for CfDecay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfDecay::Supersmooth { alpha } => write!(f, "supersmooth(alpha={alpha})"),
            CfDecay::OrdinarySmooth { gamma } => write!(f, "ordinary-smooth(gamma={gamma})"),
        }
    }
}

/// A user-supplied jump distribution.
///
/// Implementations must satisfy `cf(0) == 1`, `cf(-t) == conj(cf(t))` and
/// `|cf(t)| <= 1`; when a density is provided it must be nonnegative.
pub trait JumpDistribution: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
    fn cf(&self, t: f64) -> Complex64;
    fn density(&self, _x: f64) -> Option<f64> {
        None
    }
    fn cf_decay(&self) -> Option<CfDecay> {
        None
    }
}

/// Jump size law `F` with density `f`.
#[derive(Debug, Clone)]
pub enum JumpLaw {
    /// Standard normal jumps; `φ_f(t) = e^{-t²/2}`.
    StandardNormal,
    /// Unit-scale Laplace jumps; `f(x) = e^{-|x|}/2`, `φ_f(t) = 1/(1+t²)`.
    Laplace,
    Custom(Arc<dyn JumpDistribution>),
}

impl JumpLaw {
    pub fn name(&self) -> &str {
        match self {
            JumpLaw::StandardNormal => "normal",
            JumpLaw::Laplace => "laplace",
            JumpLaw::Custom(d) => d.name(),
        }
    }

    /// Parses a built-in law by name.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "normal" | "standard-normal" | "gaussian" => Some(JumpLaw::StandardNormal),
            "laplace" => Some(JumpLaw::Laplace),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::StandardNormal => StandardNormal.sample(rng),
            JumpLaw::Laplace => {
                let magnitude: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            JumpLaw::Custom(d) => {
                let mut adapter = DynRng(rng);
                d.sample(&mut adapter)
            }
        }
    }

    pub fn cf(&self, t: f64) -> Complex64 {
        match self {
            JumpLaw::StandardNormal => Complex64::new(libm::exp(-0.5 * t * t), 0.0),
            JumpLaw::Laplace => Complex64::new(1.0 / (1.0 + t * t), 0.0),
            JumpLaw::Custom(d) => d.cf(t),
        }
    }

    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            JumpLaw::StandardNormal => Some(libm::exp(-0.5 * x * x) / libm::sqrt(2.0 * PI)),
            JumpLaw::Laplace => Some(0.5 * libm::exp(-libm::fabs(x))),
            JumpLaw::Custom(d) => d.density(x),
        }
    }

    pub fn cf_decay(&self) -> Option<CfDecay> {
        match self {
            JumpLaw::StandardNormal => Some(CfDecay::Supersmooth { alpha: 2.0 }),
            JumpLaw::Laplace => Some(CfDecay::OrdinarySmooth { gamma: 2.0 }),
            JumpLaw::Custom(d) => d.cf_decay(),
        }
    }
}

// Lets a generic `Rng` drive a `dyn RngCore` sampler without boxing.
struct DynRng<'a, R: ?Sized>(&'a mut R);

impl<R: RngCore + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Model parameters. The observation spacing is fixed to one.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub lambda: f64,
    pub jump_law: JumpLaw,
    pub n: usize,
}

impl ModelSpec {
    pub fn new(lambda: f64, jump_law: JumpLaw, n: usize) -> Result<Self> {
        validate_lambda(lambda)?;
        if lambda > MAX_LAMBDA {
            return Err(invalid(
                "lambda",
                alloc::format!("{lambda} exceeds the supported maximum {MAX_LAMBDA}"),
            ));
        }
        if n == 0 {
            return Err(invalid("n", "at least one observation is required"));
        }
        Ok(Self { lambda, jump_law, n })
    }

    /// Observation spacing Δ; always 1 after rescaling.
    pub const fn delta(&self) -> f64 {
        1.0
    }
}

pub(crate) fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(
            "lambda",
            alloc::format!("{lambda} is not a positive finite intensity"),
        ));
    }
    Ok(())
}

/// One simulated increment with its unobservable components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub y: f64,
    pub z: f64,
    pub jump_count: u32,
}

impl Increment {
    pub fn x(&self) -> f64 {
        self.y + self.z
    }
}

/// Poisson(λ) draw by sequential search of the CDF given a uniform `u`.
pub fn poisson_inversion(lambda: f64, u: f64) -> u32 {
    let mut k = 0u32;
    let mut p = libm::exp(-lambda);
    let mut cdf = p;
    while u >= cdf && p > 0.0 {
        k += 1;
        p *= lambda / f64::from(k);
        cdf += p;
    }
    k
}

/// Draws `(Y, Z, N)` for one unit-time increment.
///
/// The jump count is drawn first, then the jumps, then the Gaussian noise.
pub fn simulate_increment<R: Rng + ?Sized>(
    lambda: f64,
    jump_law: &JumpLaw,
    rng: &mut R,
) -> Result<Increment> {
    let jump_count = poisson_inversion(lambda, rng.random::<f64>());
    let mut y = 0.0;
    for _ in 0..jump_count {
        let w = jump_law.sample(rng);
        if !w.is_finite() {
            return Err(Error::NonFiniteSample {
                law: jump_law.name().to_string(),
            });
        }
        y += w;
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(Increment { y, z, jump_count })
}

/// The sample `X_1, ..., X_n` with provenance.
#[derive(Debug, Clone)]
pub struct ObservationSet {
    pub values: Vec<f64>,
    pub spec: Option<ModelSpec>,
    pub seed: Option<u64>,
    pub components: Option<Vec<Increment>>,
}

impl ObservationSet {
    /// Wraps externally supplied increments (no provenance).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("observations", "empty sample"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(
                "observations",
                alloc::format!("value at index {i} is not finite"),
            ));
        }
        Ok(Self {
            values,
            spec: None,
            seed: None,
            components: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns a copy with every observation moved by `s`; components are dropped.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + s).collect(),
            spec: self.spec.clone(),
            seed: self.seed,
            components: None,
        }
    }

    pub fn law_name(&self) -> String {
        self.spec
            .as_ref()
            .map(|s| s.jump_law.name().to_string())
            .unwrap_or_else(|| String::from("external"))
    }
}

/// Simulates `spec.n` independent increments; increment `i` uses substream `i`.
pub fn simulate_observations(spec: &ModelSpec, seed: u64) -> Result<ObservationSet> {
    let streams = Substreams::new(seed);
    let mut values = Vec::with_capacity(spec.n);
    let mut components = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let mut rng = streams.stream(i as u64);
        let inc = simulate_increment(spec.lambda, &spec.jump_law, &mut rng)?;
        values.push(inc.x());
        components.push(inc);
    }
    Ok(ObservationSet {
        values,
        spec: Some(spec.clone()),
        seed: Some(seed),
        components: Some(components),
    })
}
