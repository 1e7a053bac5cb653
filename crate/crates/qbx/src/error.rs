//! Crate-wide error type with stable machine-readable codes.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library, each carrying a stable code string
/// (see [`Error::code`]) that the CLI and tests match on.
#[derive(Debug, Error)]
pub enum Error {
    #[error("level sets do not belong to the same cube schema: {detail}")]
    SchemaMismatch { detail: String },

    #[error("`{parent}` is not a direct parent of `{child}` in dimension `{dim}`")]
    NotParent {
        dim: String,
        child: String,
        parent: String,
    },

    #[error("no rollup relation from `{child}` to `{parent}` in dimension `{dim}`")]
    MissingRup {
        dim: String,
        child: String,
        parent: String,
    },

    #[error("member `{member}` of level `{child}` has no parent in the `{child}`→`{parent}` rollup")]
    DanglingChild {
        child: String,
        parent: String,
        member: String,
    },

    #[error("no path from level `{from}` to level `{to}` in dimension `{dim}`")]
    NoPath {
        dim: String,
        from: String,
        to: String,
    },

    #[error("more than one path from `{from}` to `{to}` in dimension `{dim}`; qualify the target with a hierarchy")]
    AmbiguousPath {
        dim: String,
        from: String,
        to: String,
    },

    #[error("cuboid given as bottom is not at the bottom level set (role `{role}` is at `{level}`, bottom is `{bottom}`)")]
    NotBottom {
        role: String,
        level: String,
        bottom: String,
    },

    #[error("level `{level}` has no attribute `{attribute}`")]
    UnknownAttr { level: String, attribute: String },

    #[error("type mismatch: {detail}")]
    TypeMismatch { detail: String },

    #[error("cannot slice dimension `{role}`: it is the cube's only dimension")]
    LastDim { role: String },

    #[error("cannot slice measure `{measure}`: it is the cube's only measure")]
    LastMeasure { measure: String },

    #[error("syntax error at {line}:{col}: {detail}")]
    Syntax {
        line: usize,
        col: usize,
        detail: String,
    },

    #[error("unknown role `{role}` in cube `{cube}`")]
    UnknownRole { cube: String, role: String },

    #[error("unknown level `{level}` in dimension `{dim}`")]
    UnknownLevel { dim: String, level: String },

    #[error("level `{to}` is not reachable by roll-up from `{from}` on role `{role}`")]
    NotReachable {
        role: String,
        from: String,
        to: String,
    },

    #[error("`{name}` is neither the cube nor a binding defined earlier")]
    UnknownSource { name: String },

    #[error("unknown measure `{measure}` in cube `{cube}`")]
    UnknownMeasure { cube: String, measure: String },

    #[error("measure `{measure}` has no aggregate function in the cube's aggregation map")]
    NoAgg { measure: String },

    #[error("graph does not conform to the QB4OLAP profile: {detail} (subject {subject})")]
    Profile { subject: String, detail: String },

    #[error("Turtle syntax error at {line}:{col}: {detail}")]
    Turtle {
        line: usize,
        col: usize,
        detail: String,
    },

    #[error("not found: {detail}")]
    NotFound { detail: String },

    #[error("no rollup predicate between `{child}` and `{parent}`")]
    NoRollupPred { child: String, parent: String },

    #[error("malformed query: {detail}")]
    Malformed { detail: String },

    #[error("endpoint returned HTTP {status}: {detail}")]
    Http { status: u16, detail: String },

    #[error("endpoint request timed out after {seconds}s")]
    Timeout { seconds: u64 },

    #[error("could not parse endpoint response: {detail}")]
    ParseResponse { detail: String },

    #[error("no graph store URL configured; cannot upload graphs")]
    NoGsp,

    #[error("duplicate cell for coordinates ({coords})")]
    DupCell { coords: String },

    #[error("observation {subject} is missing component {component}")]
    MissingComponent { subject: String, component: String },

    #[error("invalid model: {detail}")]
    InvalidModel { detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The stable machine-readable code for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SchemaMismatch { .. } => "E_SCHEMA_MISMATCH",
            Error::NotParent { .. } => "E_NOT_PARENT",
            Error::MissingRup { .. } => "E_MISSING_RUP",
            Error::DanglingChild { .. } => "E_DANGLING_CHILD",
            Error::NoPath { .. } => "E_NO_PATH",
            Error::AmbiguousPath { .. } => "E_AMBIGUOUS_PATH",
            Error::NotBottom { .. } => "E_NOT_BOTTOM",
            Error::UnknownAttr { .. } => "E_UNKNOWN_ATTR",
            Error::TypeMismatch { .. } => "E_TYPE_MISMATCH",
            Error::LastDim { .. } => "E_LAST_DIM",
            Error::LastMeasure { .. } => "E_LAST_MEASURE",
            Error::Syntax { .. } => "E_SYNTAX",
            Error::UnknownRole { .. } => "E_UNKNOWN_ROLE",
            Error::UnknownLevel { .. } => "E_UNKNOWN_LEVEL",
            Error::NotReachable { .. } => "E_NOT_REACHABLE",
            Error::UnknownSource { .. } => "E_UNKNOWN_SOURCE",
            Error::UnknownMeasure { .. } => "E_UNKNOWN_MEASURE",
            Error::NoAgg { .. } => "E_NO_AGG",
            Error::Profile { .. } => "E_PROFILE",
            Error::Turtle { .. } => "E_TURTLE",
            Error::NotFound { .. } => "E_NOT_FOUND",
            Error::NoRollupPred { .. } => "E_NO_ROLLUP_PRED",
            Error::Malformed { .. } => "E_MALFORMED",
            Error::Http { .. } => "E_HTTP",
            Error::Timeout { .. } => "E_TIMEOUT",
            Error::ParseResponse { .. } => "E_PARSE",
            Error::NoGsp => "E_NO_GSP",
            Error::DupCell { .. } => "E_DUP_CELL",
            Error::MissingComponent { .. } => "E_MISSING_COMPONENT",
            Error::InvalidModel { .. } => "E_INVALID_MODEL",
            Error::Io { .. } => "E_IO",
        }
    }
}
