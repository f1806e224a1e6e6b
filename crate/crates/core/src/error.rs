use thiserror::Error;

pub type Result<T, E = MetrologyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetrologyError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {actual:.3e} differs from expected {expected}")]
    TraceMismatch { expected: f64, actual: f64 },

    #[error("state is not normalized (norm^2 = {norm_sqr:.15})")]
    NotNormalized { norm_sqr: f64 },

    #[error("invalid spin quantum number: 2j = {twice_j} (must be in 1..=64)")]
    InvalidSpin { twice_j: u32 },

    #[error("{name} = {value} outside [{lo}, {hi}]")]
    AngleOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("magnetic quantum number 2m = {twice_m} out of range for 2j = {twice_j}")]
    MagneticOutOfRange { twice_j: u32, twice_m: i32 },

    #[error("invalid protocol parameter: {0}")]
    InvalidParams(String),

    #[error("postselection impossible: success probability {p:.3e} at or below cutoff")]
    PostselectionImpossible { p: f64 },

    #[error("modular value undefined: postselected state orthogonal to the evolved sensor state")]
    OrthogonalPostselection,

    #[error("phase-flip probability nu = {nu} outside the open interval (0, 1)")]
    NoiseOutOfRange { nu: f64 },

    #[error("phase-flip channel is defined only for the qubit pointer (got dimension {dim})")]
    QubitOnly { dim: usize },

    #[error("closed form has a limit point here ({0}); approach it along theta instead")]
    LimitPoint(&'static str),

    #[error("invalid derivative step {step:e} (must lie in [1e-9, 1e-2])")]
    InvalidStep { step: f64 },

    #[error("analytic derivative requested but the family does not provide one")]
    MissingAnalyticDerivative,

    #[error("negative probability {value:e} at outcome {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum:.15} instead of 1")]
    ProbabilitySum { sum: f64 },

    #[error("probability {p:e} at the boundary of [0, 1]")]
    ProbabilityBoundary { p: f64 },
}
