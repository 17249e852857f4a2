use std::path::PathBuf;

use crate::catalog::{AttributeId, CriterionId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("rating {value} for criterion {criterion} is outside [-2, +2]")]
    RatingRange { criterion: String, value: String },

    #[error("rating {value} for criterion {criterion} is not an anchor value (nearest anchors: {nearest})")]
    OffAnchor {
        criterion: CriterionId,
        value: String,
        nearest: String,
    },

    #[error("fraction {0} is outside [0, 1]")]
    FractionRange(String),

    #[error("unknown grade {0:?}, expected one of A, B, C, D, E")]
    UnknownGrade(String),

    #[error("unknown attribute {0}")]
    UnknownAttribute(String),

    #[error("unknown criterion {0}")]
    UnknownCriterion(String),

    #[error("criterion {0} is assessed more than once")]
    DuplicateCriterion(CriterionId),

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("profile targets catalog version {found:?}, expected {expected:?}")]
    CatalogVersion { expected: String, found: String },

    #[error("profiles use different catalog versions: {0:?}")]
    MixedCatalogVersions(Vec<String>),

    #[error("weights sum to {sum}, expected {expected} (difference {difference})")]
    WeightSum {
        sum: String,
        expected: usize,
        difference: String,
    },

    #[error("negative weights for attributes {0:?}")]
    NegativeWeight(Vec<AttributeId>),

    #[error("weights do not match the catalog: missing {missing:?}, unexpected {unexpected:?}")]
    WeightMismatch {
        missing: Vec<AttributeId>,
        unexpected: Vec<AttributeId>,
    },

    #[error("infeasible pin set: {0}")]
    InfeasiblePin(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("ballot {index} is malformed: {reason}")]
    MalformedBallot { index: usize, reason: String },

    #[error("rank {rank} is outside [1, {n}]")]
    RankRange { rank: String, n: usize },

    #[error("evidence sources cover different attribute sets ({0})")]
    MismatchedAttributes(String),

    #[error("degenerate range: lower bound {lo} exceeds upper bound {hi}")]
    DegenerateRange { lo: String, hi: String },

    #[error("{0}")]
    InvalidRange(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("grade report is missing key {0:?}")]
    MissingKey(&'static str),

    #[error("unknown library {0:?}")]
    UnknownLibrary(String),

    #[error("library {library:?} has no revision {revision}")]
    UnknownRevision { library: String, revision: u64 },

    #[error("revision {revision} of {library:?} was written concurrently; retry")]
    WriteConflict { library: String, revision: u64 },

    #[error("stored record {path} fails its content hash check")]
    HashMismatch { path: PathBuf },

    #[error("reference weights derived from shipped evidence differ from the shipped vector for attributes {0:?}")]
    ReferenceMismatch(Vec<AttributeId>),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable code for the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::RatingRange { .. } | Error::FractionRange(_) | Error::RankRange { .. } => "RANGE",
            Error::OffAnchor { .. } => "OFF_ANCHOR",
            Error::UnknownGrade(_) => "UNKNOWN_GRADE",
            Error::UnknownAttribute(_) => "UNKNOWN_ATTRIBUTE",
            Error::UnknownCriterion(_) => "UNKNOWN_CRITERION",
            Error::DuplicateCriterion(_) => "DUPLICATE_CRITERION",
            Error::InvalidCatalog(_) => "INVALID_CATALOG",
            Error::CatalogVersion { .. } => "CATALOG_VERSION",
            Error::MixedCatalogVersions(_) => "MIXED_CATALOG_VERSIONS",
            Error::WeightSum { .. } => "WEIGHT_SUM",
            Error::NegativeWeight(_) => "WEIGHT_NEGATIVE",
            Error::WeightMismatch { .. } => "WEIGHT_MISMATCH",
            Error::InfeasiblePin(_) => "INFEASIBLE_PIN",
            Error::EmptyInput(_) => "EMPTY_INPUT",
            Error::MalformedBallot { .. } => "MALFORMED_BALLOT",
            Error::MismatchedAttributes(_) => "MISMATCHED_ATTRIBUTES",
            Error::DegenerateRange { .. } => "DEGENERATE_RANGE",
            Error::InvalidRange(_) => "INVALID_RANGE",
            Error::Parse { .. } => "PARSE",
            Error::MissingKey(_) => "MISSING_KEY",
            Error::UnknownLibrary(_) => "UNKNOWN_LIBRARY",
            Error::UnknownRevision { .. } => "UNKNOWN_REVISION",
            Error::WriteConflict { .. } => "WRITE_CONFLICT",
            Error::HashMismatch { .. } => "HASH_MISMATCH",
            Error::ReferenceMismatch(_) => "REFERENCE_MISMATCH",
            Error::Io { .. } => "IO",
        }
    }

    /// Whether repeating the same operation may succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::WriteConflict { .. })
    }

    /// Structured fields of the error, for API payloads.
    pub fn detail(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Error::RatingRange { criterion, value } => json!({"criterion": criterion, "value": value}),
            Error::OffAnchor { criterion, value, nearest } => {
                json!({"criterion": criterion, "value": value, "nearest": nearest})
            }
            Error::FractionRange(v) => json!({"value": v}),
            Error::UnknownGrade(g) => json!({"grade": g}),
            Error::UnknownAttribute(a) => json!({"attribute": a}),
            Error::UnknownCriterion(c) => json!({"criterion": c}),
            Error::DuplicateCriterion(c) => json!({"criterion": c}),
            Error::CatalogVersion { expected, found } => json!({"expected": expected, "found": found}),
            Error::MixedCatalogVersions(v) => json!({"versions": v}),
            Error::WeightSum { sum, expected, difference } => {
                json!({"sum": sum, "expected": expected, "difference": difference})
            }
            Error::NegativeWeight(ids) | Error::ReferenceMismatch(ids) => json!({"attributes": ids}),
            Error::WeightMismatch { missing, unexpected } => json!({"missing": missing, "unexpected": unexpected}),
            Error::EmptyInput(what) => json!({"input": what}),
            Error::MalformedBallot { index, reason } => json!({"index": index, "reason": reason}),
            Error::RankRange { rank, n } => json!({"rank": rank, "n": n}),
            Error::DegenerateRange { lo, hi } => json!({"lo": lo, "hi": hi}),
            Error::Parse { context, message } => json!({"context": context, "message": message}),
            Error::MissingKey(k) => json!({"key": k}),
            Error::UnknownLibrary(id) => json!({"library_id": id}),
            Error::UnknownRevision { library, revision } | Error::WriteConflict { library, revision } => {
                json!({"library_id": library, "revision": revision})
            }
            Error::HashMismatch { path } | Error::Io { path, .. } => json!({"path": path}),
            Error::InvalidCatalog(m) | Error::InfeasiblePin(m) | Error::MismatchedAttributes(m) | Error::InvalidRange(m) => {
                json!({"reason": m})
            }
        }
    }

    pub fn parse(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Error::Parse {
            context: context.into(),
            message: err.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
