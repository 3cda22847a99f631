use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("containment lost at step {step}: edge amplitude ratio {ratio:.3e}")]
    Containment { step: usize, ratio: f64 },

    #[error("step too large: dt*E_max/hbar = {0:.3} (must be < 0.5)")]
    StepTooLarge(f64),

    #[error("frame mismatch: expected {expected}, got {got}")]
    FrameMismatch {
        expected: &'static str,
        got: &'static str,
    },

    #[error("grid mismatch between wavefunctions")]
    GridMismatch,

    #[error("overlap magnitude {magnitude:.3e} below threshold{}", sample.map(|s| format!(" at sample {s}")).unwrap_or_default())]
    NoOverlap {
        magnitude: f64,
        sample: Option<usize>,
    },

    #[error("quadrature did not converge: estimated error {estimate:.3e} > tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("ill-conditioned fit: {0}")]
    Conditioning(String),

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
