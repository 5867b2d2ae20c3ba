use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error("unknown morphism or attribute `{0}`")]
    UnknownColumn(String),

    #[error("`{column}` is defined on `{expected}`, not on `{found}`")]
    DomainMismatch {
        column: String,
        expected: String,
        found: String,
    },

    #[error("`{column}` points into `{expected}`, not into `{found}`")]
    CodomainMismatch {
        column: String,
        expected: String,
        found: String,
    },

    #[error("attribute `{attr}` expects a {expected} value")]
    AttrTypeMismatch { attr: String, expected: String },

    #[error("part {0} does not exist")]
    NoSuchPart(String),

    #[error("schema mismatch: `{left}` vs `{right}`")]
    SchemaMismatch { left: String, right: String },

    #[error("instance is invalid: {count} violation(s), first: {first}")]
    Invalid { count: usize, first: String },

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("arity mismatch for `{var}`: operator `{op}` cannot take {got} argument(s)")]
    Arity { var: String, op: String, got: usize },

    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("attribute conflict on merged part {part}: `{attr}` is {left} vs {right}")]
    AttrConflict {
        part: String,
        attr: String,
        left: String,
        right: String,
    },

    #[error("no typing of the diagram into the type diagram exists")]
    NoTyping,

    #[error("automatic typing is ambiguous: {0} candidate typings")]
    AmbiguousTyping(usize),

    #[error("formula error for `{var}`: {reason}")]
    Formula { var: String, reason: String },

    #[error("missing binding for `{0}`")]
    MissingBinding(String),

    #[error("division by zero in `{0}`")]
    DivisionByZero(String),

    #[error("unsupported operator/position: {0}")]
    Unsupported(String),

    #[error("non-finite value at t = {time}: {what}")]
    NonFinite { time: f64, what: String },

    #[error("negative hazard {value} for flow `{flow}` at t = {time}")]
    NegativeHazard { flow: String, value: f64, time: f64 },

    #[error("broken path: {0}")]
    BrokenPath(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from malformed input rather than a domain rule.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Io(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
