use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency m = 0 is resonant and has no divisor set")]
    ZeroFrequency,
    #[error("invalid (m, z) pair: 2*{z} does not divide {m}")]
    InvalidPair { m: i64, z: i64 },
    #[error("momentum mismatch: k = {k} but j1 - j2 + j3 = {sum}")]
    MomentumMismatch { k: i64, sum: i64 },
    #[error("resonant triple ({j1}, {j2}, {j3}) for mode {k}: quadratic phase vanishes")]
    ResonantTriple { k: i64, j1: i64, j2: i64, j3: i64 },
    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),
    #[error("sequence support [{lo}, {hi}] exceeds truncation |k| <= {k_max}")]
    SupportExceedsTruncation { lo: i64, hi: i64, k_max: i64 },
    #[error("state length {got} does not match truncation (expected {expected})")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("time must be positive, got {t}")]
    NonPositiveTime { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("maximum number of steps exceeded at t = {t}")]
    MaxSteps { t: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("grid size {n} is not a power of two")]
    NotPowerOfTwo { n: usize },
    #[error("grid size {n} too small, need at least {required}")]
    GridTooSmall { n: usize, required: usize },
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("quadrature did not converge: error bound {bound:e} exceeds tolerance {tol:e}")]
    QuadratureNonConvergence { bound: f64, tol: f64 },
    #[error("Picard iteration diverged at iteration {iteration} (last ratios {ratios:?})")]
    Divergence { iteration: usize, ratios: Vec<f64> },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
