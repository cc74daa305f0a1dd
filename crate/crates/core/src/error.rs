use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no orbit with winding number {winding}: M²·γ̃ = {value} exceeds 1")]
    NoOrbit { winding: usize, value: f64 },

    #[error("parameter window violated: {0}")]
    Window(String),

    #[error("state left the separatrix region: C = {energy}")]
    OutOfSeparatrix { energy: f64 },

    #[error("periodic orbit not found: {0}")]
    NotFound(String),

    #[error("converged to rotation number {found}/{period}, expected {expected}/{period}")]
    WrongClass { found: usize, expected: usize, period: usize },

    #[error("orbit does not close: return residual {residual:e}")]
    StaleOrbit { residual: f64 },

    #[error("non-finite state after {steps} steps; time step too large?")]
    BlowUp { steps: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("classification mismatch: {0}")]
    Classification(String),
}
