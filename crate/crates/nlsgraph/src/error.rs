use thiserror::Error;

/// Errors raised while building or parsing a metric graph.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid graph: {0}")]
    Invalid(String),
}

/// Errors raised by discretization and functional evaluation.
#[derive(Debug, Clone, Error)]
pub enum FunctionError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("function is identically zero where a nonzero function is required")]
    ZeroFunction,
    #[error("zero kinetic term: quotient undefined")]
    ZeroKinetic,
    #[error("mass is zero: {0}")]
    ZeroMass(String),
    #[error("function mass leaks off edge {edge:?}: offending edges {offending:?} carry {leak:.3e} of {total:.3e}")]
    SupportViolation {
        edge: String,
        offending: Vec<String>,
        leak: f64,
        total: f64,
    },
    #[error("discretization mismatch between operands")]
    DiscMismatch,
    #[error("{0}")]
    Precondition(String),
}

/// Errors raised by the variational solver.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("mass must be positive, got {0}")]
    InvalidMass(f64),
    #[error("no initial functions supplied")]
    EmptyInits,
    #[error("{0}")]
    Function(#[from] FunctionError),
}

/// Errors raised by the transform pipeline.
#[derive(Debug, Clone, Error)]
pub enum TransformError {
    #[error("input must be nonincreasing: sample {index} rises by {rise:.3e}")]
    NotMonotone { index: usize, rise: f64 },
    #[error("no admissible tail point found in [l/2, l); grid pathology")]
    TailScanFailed,
    #[error("maximum at {location} admits no surgery-free continuation path of length {ell}")]
    UnsupportedContinuation { location: String, ell: f64 },
    #[error("graph has a terminal point; hypothesis requires none")]
    TerminalPoint,
    #[error("mass {mass:.6} exceeds the critical line mass {limit:.6} beyond budget")]
    MassTooLarge { mass: f64, limit: f64 },
    #[error("{0}")]
    Function(#[from] FunctionError),
}
