use alloc::string::String;
use alloc::vec::Vec;

use crate::wavefunction::Frame;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(
        "grid mismatch: {left} points on [{left_min}, {left_max}) vs {right} points on [{right_min}, {right_max})"
    )]
    GridMismatch {
        left: usize,
        left_min: f64,
        left_max: f64,
        right: usize,
        right_min: f64,
        right_max: f64,
    },

    #[error("frame mismatch: expected {expected} frame, found {found}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("imaginary-time relaxation did not converge after {steps} steps (last energies {trace:?})")]
    NotConverged { steps: usize, trace: Vec<f64> },

    #[error("no bound state: relaxed energy {0} is not negative")]
    NoBoundState(f64),

    #[error("eigenstate {index} has edge amplitude {amplitude:e}; widen the eigensolver domain")]
    DomainTooNarrow { index: usize, amplitude: f64 },

    #[error("non-finite amplitude after step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("window [{lo}, {hi}] holds norm {norm:e}; nothing is trapped")]
    EmptyWindow { lo: f64, hi: f64, norm: f64 },

    #[error("momentum window reaches |p| = {requested}, beyond the resolvable limit {limit}")]
    MomentumWindow { requested: f64, limit: f64 },

    #[error("averaged potential is not double-welled: {0}")]
    NotDichotomous(String),

    #[error("time {t} is outside [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
