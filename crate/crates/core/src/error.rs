use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} entries, grid expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("right-hand side mean {mean:e} is incompatible with a singular operator (|rhs| = {norm:e})")]
    IncompatibleRhs { mean: f64, norm: f64 },

    #[error("linear solve did not reach tolerance: relative residual {residual:e} > {tolerance:e}")]
    NonConvergence { residual: f64, tolerance: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("scalar coefficient A = {0:e} is not positive")]
    NonPositiveA(f64),

    #[error("E1(phi) + delta0 = {value:e} fell below the floor {floor:e}")]
    EnergyFloor { value: f64, floor: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}
