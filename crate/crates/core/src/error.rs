use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("every column of the feature matrix is constant")]
    AllColumnsConstant,
    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteInput { row: usize, column: usize },
    #[error("feature matrix needs at least {required} rows, got {got}")]
    TooFewRows { required: usize, got: usize },
    #[error("feature matrix is not standardized")]
    NotStandardized,
    #[error("feature matrix is already standardized; aggregate raw values")]
    AlreadyStandardized,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("duplicate area id `{0}`")]
    DuplicateAreaId(String),
    #[error("k_neighbors must be at least 1")]
    InvalidNeighborCount,
    #[error("coincident rows (zero distance): {}", format_pairs(.pairs))]
    CoincidentRows { pairs: Vec<(String, String)> },
    #[error("node `{0}` has no incident edges")]
    IsolatedNode(String),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("requested {requested} nonzero eigenpairs but only {available} exist")]
    SpectrumExhausted { requested: usize, available: usize },
    #[error("eigenvector index {index} out of range (valid 1..={max})")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("areas missing from hierarchy: {}", .0.join(", "))]
    UnmappedArea(Vec<String>),
    #[error("LSOA `{0}` has no member values")]
    EmptyLsoa(String),
    #[error("OA `{oa}` mapped to both `{first}` and `{second}`")]
    ConflictingMapping { oa: String, first: String, second: String },
    #[error("series `{0}` is constant")]
    ConstantSeries(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series needs at least 2 values")]
    TooShort,
    #[error("missing domain `{0}`")]
    MissingDomain(String),
    #[error("invalid weight for `{0}`: weights must be positive and finite")]
    InvalidWeight(String),
    #[error("code `{0}` is not part of the universe")]
    CodeOutsideUniverse(String),
    #[error("domain ranks missing for `{0}`")]
    RanksMissing(String),
    #[error("unknown area `{0}`")]
    UnknownArea(String),
    #[error("{path}: missing id column `{column}`")]
    MissingIdColumn { path: PathBuf, column: String },
    #[error("{path}: non-numeric cell `{value}` at row {row}, column `{column}`")]
    NonNumericCell {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path}: missing column `{column}` for {domain}")]
    MissingDomainColumn {
        path: PathBuf,
        domain: String,
        column: String,
    },
    #[error("{path}: malformed row {row}: {reason}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        reason: String,
    },
    #[error("invalid GeoJSON: {0}")]
    InvalidGeoJson(String),
    #[error("unknown synthetic kind `{0}` (expected line1d, circle or two_clusters)")]
    UnknownKind(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}
