use thiserror::Error;

/// Errors from expression parsing, evaluation and symbolic linear algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expression is singular at the sample point")]
    Singular,
    #[error("variable `{0}` has no value at the sample point")]
    UnboundVariable(String),
    #[error("indeterminate: {attempts} sample points were singular")]
    Indeterminate { attempts: usize },
    #[error("rank deficient: expected rank {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },
    #[error("cannot invert map; unsolved equations: {}", unsolved.join(", "))]
    UnsupportedInversion { unsolved: Vec<String> },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Errors raised by the geometric, system and flatness layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("no closed-form first integrals found; residual PDE system: {}", pde.join("; "))]
    FirstIntegrals { pde: Vec<String> },
    #[error("could not construct an involutive complement: {0}")]
    ComplementConstruction(String),
    #[error("no selection of {count} components yields an invertible input transformation")]
    Resorting { count: usize },
    #[error("cauchy characteristic mismatch: {0}")]
    CauchyMismatch(String),
    #[error("system is locally not reachable: {0}")]
    NotReachable(String),
    #[error("no basis completion among coordinate functions")]
    CompletionFailure,
    #[error("no projectable input field")]
    NoProjectableField,
    #[error("invalid file: {0}")]
    Format(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
