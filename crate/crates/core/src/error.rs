use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes or lengths of the inputs do not conform.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Evaluation requested at a point where the quantity blows up.
    #[error("singular point: {0}")]
    Singular(String),

    /// Input data break the sign/positivity conditions the reconstruction relies on.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// Measured or synthesized data are unusable (e.g. nonpositive flux).
    #[error("data error: {0}")]
    Data(String),

    /// The modeled flux denominator dropped below the guard at some node.
    #[error("operator not well defined at node {node} (t = {t}): flux denominator {value:e}")]
    NotWellDefined { node: usize, t: f64, value: f64 },

    /// Configuration or descriptor text could not be understood.
    #[error("config error{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
