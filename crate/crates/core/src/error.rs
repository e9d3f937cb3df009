use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("state is not normalized: norm^2 = {norm_sqr:.3e}")]
    NotNormalized { norm_sqr: f64 },

    #[error("matrix is not unitary: max |U^dagger U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not Hermitian: max |H - H^dagger| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not skew-Hermitian: max |X + X^dagger| = {deviation:.3e}")]
    NotSkewHermitian { deviation: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not doubly stochastic: {0}")]
    NotStochastic(String),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid measurement spec: {0}")]
    InvalidSpec(String),

    #[error("invalid Boolean word: {0}")]
    InvalidWord(String),

    #[error("index {index} outside [1, {max}]")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid control schedule: {0}")]
    InvalidSchedule(String),

    #[error("unitary schedule has no entry for interval {interval}")]
    ScheduleTooShort { interval: usize },

    #[error("conditional amplitude vector vanished (norm {norm:.3e}); the path is impossible")]
    ZeroNormBeta { norm: f64 },

    #[error("outcome {outcome} has probability {probability:.3e}; it cannot be observed")]
    ImpossibleOutcome { outcome: String, probability: f64 },

    #[error("enumeration over {n} qubits is infeasible (limit {max})")]
    TooLarge { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Lie closure exceeded {max} elements; tolerance is likely misconfigured")]
    ClosureOverflow { max: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors that report a violated input invariant
    /// (non-unitary, non-Hermitian, unnormalized, not stochastic, ...).
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized { .. }
                | Error::NotUnitary { .. }
                | Error::NotHermitian { .. }
                | Error::NotSkewHermitian { .. }
                | Error::NotSquare { .. }
                | Error::NotStochastic(_)
                | Error::InvalidObservable(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
