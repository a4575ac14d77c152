use thiserror::Error;

/// Everything that can go wrong while building, solving, or analysing a system.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coupling matrix is not symmetric at ({row}, {col})")]
    AsymmetricMatrix { row: usize, col: usize },

    #[error("structured coupling needs at least 3 states, got {0}")]
    StructuredRequiresN3(usize),

    #[error("pulse cannot reach area {target}")]
    Unreachable { target: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("reduced system has coincident roots y+ = y-")]
    DegenerateRoots,

    #[error("n0 must be odd, got {0}")]
    EvenN0(i64),

    #[error("transfer design needs n >= 3, got {0}")]
    NTooSmall(usize),

    #[error("energies are not degenerate; use the numerical integrator")]
    NotDegenerate,

    #[error("norm drifted by {drift:e} at t = {time}")]
    NormDrift { drift: f64, time: f64 },

    #[error("{steps} integration steps exceed the limit")]
    StepCountOverflow { steps: f64 },

    #[error("time {time} outside trajectory span [{start}, {end}]")]
    OutOfRange { time: f64, start: f64, end: f64 },

    #[error("power-law fit needs at least 3 distinct points, got {0}")]
    InsufficientPoints(usize),

    #[error("power-law fit needs strictly positive values")]
    NonPositiveValue,

    #[error("detuning ratio {0} outside [0, 1)")]
    RatioOutOfRange(f64),
}

impl Error {
    /// Stable identifier used on machine-readable diagnostic lines.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::AsymmetricMatrix { .. } => "AsymmetricMatrix",
            Error::StructuredRequiresN3(_) => "StructuredRequiresN3",
            Error::Unreachable { .. } => "Unreachable",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DegenerateRoots => "DegenerateRoots",
            Error::EvenN0(_) => "EvenN0",
            Error::NTooSmall(_) => "NTooSmall",
            Error::NotDegenerate => "NotDegenerate",
            Error::NormDrift { .. } => "NormDrift",
            Error::StepCountOverflow { .. } => "StepCountOverflow",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InsufficientPoints(_) => "InsufficientPoints",
            Error::NonPositiveValue => "NonPositiveValue",
            Error::RatioOutOfRange(_) => "RatioOutOfRange",
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::NormDrift { .. }
                | Error::StepCountOverflow { .. }
                | Error::DegenerateRoots
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
