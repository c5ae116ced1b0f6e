use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no data rows")]
    NoDataRows,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}, column `{column}`: `{value}` is not numeric")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("dimension {0} is below the minimum of 2")]
    DimensionTooSmall(usize),
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value at coordinate {0}")]
    NonFinite(usize),
    #[error("{what} has length {found}, dimension is {expected}")]
    ParameterLength {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("weight {0} is zero; mapping is not invertible")]
    ZeroWeight(usize),
    #[error("graph has {found} nodes, mode expects {expected}")]
    NodeCount { expected: usize, found: usize },
    #[error("mode `{0}` cannot be inverted without offsets")]
    NotInvertible(&'static str),
    #[error("rule `{rule}` refers to unknown box `{box_id}`")]
    DanglingBox { rule: String, box_id: String },
    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("node selector {index} out of range for a graph with {nodes} nodes")]
    SelectorOutOfRange { index: usize, nodes: usize },
    #[error("threshold fit needs at least one projection of each class")]
    SingleClass,
    #[error("regression needs at least two distinct projections")]
    DegenerateProjections,
    #[error("fold size must be positive")]
    EmptyFold,
    #[error("misclassified count {misclassified} exceeds fold size {fold_size}")]
    TooManyMisclassified { misclassified: usize, fold_size: usize },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("state token {given} is stale; current state is {current}")]
    StaleState { given: u64, current: u64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
