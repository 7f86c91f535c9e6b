use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A nested logarithm in a confidence radius has a non-positive argument.
    #[error("radius undefined at t={t}, omega={omega}: {reason}")]
    RadiusDomain { t: u64, omega: f64, reason: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("threshold search exceeded the ceiling t <= {ceiling}")]
    ThresholdOverflow { ceiling: u64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The top-K (or best feasible) set is not unique.
    #[error("optimal set is not unique: {0}")]
    DegenerateOptimum(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("decision class error: {0}")]
    DecisionClass(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse { line: usize, column: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
