use thiserror::Error;

/// Errors produced by state validation, the measurement model and the
/// error-bound computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Bloch vector has length {0}, outside the unit ball")]
    BlochOutOfBall(f64),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("trace must be 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("measurement strength out of range: {0}")]
    StrengthOutOfRange(f64),

    #[error("degenerate measurement strength: lambda too close to 1")]
    DegenerateStrength,

    #[error("projection onto the pointer readout state vanished")]
    DegenerateProjection,

    #[error("probability out of range: {0}")]
    InvalidProbability(f64),

    #[error("probability constraint violated: expected {expected}, got {got}")]
    ConstraintViolation { expected: f64, got: f64 },

    #[error("Fisher matrix is singular: outcome probability {0:e} below floor")]
    SingularFisher(f64),

    #[error("ill-conditioned matrix (determinant {0:e})")]
    IllConditioned(f64),

    #[error("no sign change over the crossover bracket")]
    NoCrossover,

    #[error("invalid count record: {0}")]
    InvalidCounts(String),

    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that arise from numerical degeneracy rather than
    /// malformed input. CLI front ends use this to pick exit codes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateStrength
                | Error::DegenerateProjection
                | Error::SingularFisher(_)
                | Error::IllConditioned(_)
                | Error::NoCrossover
        )
    }
}
