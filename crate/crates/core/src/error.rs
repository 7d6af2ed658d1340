use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("line {line}, column {column}: {message}")]
    Cell {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column `{0}` not present in header")]
    UnknownLabelColumn(String),

    #[error("no wavelengths inside window [{lo}, {hi}] nm")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Cholesky factorization failed at pivot {pivot}; matrix is not positive definite (try a larger ridge_eps_rel)")]
    NotPositiveDefinite { pivot: usize },

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("differences have zero variance")]
    ZeroVariance,

    #[error("evaluator failed (feature under trial: {feature:?}): {source}")]
    Evaluator {
        feature: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("{}stage `{stage}`: {source}", fold.map(|f| format!("fold {f}, ")).unwrap_or_default())]
    Stage {
        fold: Option<usize>,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("model text line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numeric core rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. } => true,
            Error::Evaluator { source, .. } | Error::Stage { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
