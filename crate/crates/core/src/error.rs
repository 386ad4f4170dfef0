use std::time::Duration;

use thiserror::Error;

/// Result alias used across the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the verifier can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // model
    #[error("invalid feature space: {0}")]
    InvalidSpace(String),
    #[error("coordinate {index} ({feature}) = {value} lies outside the feature space [{lower}, {upper}]")]
    PointOutOfDomain {
        index: usize,
        feature: String,
        value: String,
        lower: String,
        upper: String,
    },
    #[error("value `{0}` is not an IEEE-754 binary32 value")]
    NonRepresentable(String),
    #[error("point has {got} coordinates, feature space has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty box: {0}")]
    EmptyBox(String),
    #[error("box is not contained in the feature space: {0}")]
    BoxOutsideDomain(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),

    // ingest
    #[error("base score missing: gradient-boosted dumps do not carry the base score, supply it explicitly (omitting it shifts every logit by a constant offset)")]
    MissingBaseScore,
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("malformed dump: {0}")]
    MalformedDump(String),
    #[error("node {node_id} carries a missing-value default branch; pass --allow-missing-branch to ignore it (inputs are never missing)")]
    UnsupportedMissingBranch { node_id: String },
    #[error("bin edges for `{0}` are not strictly ascending")]
    NonAscendingEdges(String),
    #[error("term over `{term}` has {scores} scores for {edges} edges (expected edges + 1)")]
    ScoreCountMismatch {
        term: String,
        edges: usize,
        scores: usize,
    },
    #[error("malformed fixture: {0}")]
    MalformedFixture(String),

    // spec-lang
    #[error("unknown monotonic direction `{0}`")]
    UnknownDirection(String),
    #[error("spec {spec}: malformed atom `{atom}` at position {position}: {reason}")]
    MalformedAtom {
        spec: String,
        atom: String,
        position: usize,
        reason: String,
    },
    #[error("malformed specification file: {0}")]
    MalformedSpecs(String),
    #[error("conclusions differ: `{0}` vs `{1}`")]
    ConclusionMismatch(String, String),

    // verifier
    #[error("resource limit exhausted after {nodes} nodes ({elapsed:?}): {reason}")]
    ResourceExhausted {
        reason: String,
        nodes: u64,
        elapsed: Duration,
    },
    #[error("interval {0} contains no binary32 value")]
    DegenerateInterval(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),

    // explain
    #[error("invalid feature order: {0}")]
    InvalidOrder(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
