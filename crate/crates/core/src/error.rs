use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("mesh parse error: {0}")]
    Parse(String),
    #[error("mesh i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("unsupported polynomial degree {0} (supported: 0, 1)")]
    UnsupportedDegree(usize),
    #[error("quadrature of degree {requested} not available (max {max})")]
    UnsupportedQuadrature { requested: usize, max: usize },
    #[error("cell index {cell} out of range ({num_cells} cells)")]
    CellOutOfRange { cell: usize, num_cells: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("invalid material parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("permeability pole at zeta = {0}")]
    Pole(f64),
    #[error("non-positive permeability {value:e} at zeta = {zeta}")]
    NonPositive { zeta: f64, value: f64 },
    #[error("tensor is not symmetric (defect {0:e})")]
    NotSymmetric(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("cell {cell}: {source}")]
    Permeability { cell: usize, source: PhysicsError },
    #[error("unknown boundary tag '{0}'")]
    UnknownTag(String),
    #[error("tag '{0}' has no boundary edges")]
    EmptyTag(String),
    #[error("boundary condition on tag '{tag}': {reason}")]
    BoundaryCondition { tag: String, reason: String },
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("state vector size mismatch for {field}: expected {expected}, got {got}")]
    SizeMismatch { field: &'static str, expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("linear solve failed: {reason}; {diagnostics}")]
    Singular { reason: String, diagnostics: String },
    #[error("linear residual {residual:e} above tolerance after refinement")]
    InaccurateSolve { residual: f64 },
    #[error("no convergence after {iterations} iterations (changes: {changes:?})")]
    NotConverged { iterations: usize, changes: Vec<f64> },
    #[error("time step {step} (t = {time}): {source}")]
    TimeStep { step: usize, time: f64, source: Box<SolveError> },
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerificationError {
    #[error("need at least {needed} levels, got {got}")]
    TooFewLevels { needed: usize, got: usize },
    #[error("level {level}: error {value:e} must be positive and finite")]
    NonPositiveError { level: usize, value: f64 },
    #[error("level {level}: mesh sizes must be positive and distinct")]
    BadMeshSize { level: usize },
    #[error("dense problem of dimension {dim} exceeds the limit {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("dense eigenproblem failed: {0}")]
    Eigen(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Invalid run configuration, naming the offending field.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self { field: field.to_string(), message: message.into() }
    }
}
