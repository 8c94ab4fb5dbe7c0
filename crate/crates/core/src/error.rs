use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("state {index}: Bloch vector length {norm} exceeds 1")]
    BlochOutOfRange { index: usize, norm: f64 },

    #[error("priors must sum to 1 (got {sum})")]
    PriorsSum { sum: f64 },

    #[error("prior {index} is negative ({value})")]
    NegativePrior { index: usize, value: f64 },

    #[error("an ensemble needs at least two states (got {0})")]
    TooFewStates(usize),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("direction is not a unit vector (norm {0})")]
    NonUnitDirection(f64),

    #[error("invalid effect: eigenvalues ({0}, {1}) outside [0, 1]")]
    InvalidEffect(f64, f64),

    #[error("elements do not sum to the identity (deviation {0})")]
    Incomplete(f64),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("candidate elements cannot form a POVM")]
    NotFormable,

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("solver exhausted all candidate subsets: {0}")]
    SolverExhausted(String),

    #[error("dual solver did not converge after {iterations} iterations (best P_e {best_p_error})")]
    NonConvergence { iterations: usize, best_p_error: f64 },

    #[error("POVM recovery from dual failed: {0}")]
    Recovery(String),

    #[error("invalid POVM for sampling: {0}")]
    InvalidSampling(String),
}
