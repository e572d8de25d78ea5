use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular or ill-conditioned (condition number {cond:.3e})")]
    Singular { cond: f64 },
    #[error("matrix is not self-adjoint (‖b − b*‖ = {defect:.3e})")]
    NotSelfAdjoint { defect: f64 },
    #[error("element is not in the span of the generated subalgebra (residual {residual:.3e})")]
    NotInSubalgebra { residual: f64 },
    #[error("map is not a *-homomorphism (defect {defect:.3e})")]
    NotHomomorphism { defect: f64 },
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("grid symbol does not decay at the boundary (ratio {ratio:.3e})")]
    DecayViolation { ratio: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("routes disagree: {what} differs by {diff:.3e} (allowed {allowed:.3e})")]
    Convergence { what: String, diff: f64, allowed: f64 },
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),
    #[error("unsupported dimension {n}: {what}")]
    UnsupportedDimension { n: usize, what: String },
    #[error("division by zero: {0}")]
    DivideByZero(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed input at byte offset {offset}: {msg}")]
    Format { offset: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
