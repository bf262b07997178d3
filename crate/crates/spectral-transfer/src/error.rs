use nalgebra::Complex;
use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} has zero degree; the normalized Laplacian is undefined")]
    DegenerateDegree { vertex: usize },

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("invalid inner product: {0}")]
    InvalidInnerProduct(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("filter `{filter}` is undefined at {value}")]
    Evaluation { filter: String, value: Complex<f64> },

    #[error("singular filter denominator (condition number {cond:e})")]
    SingularFilter { cond: f64 },

    #[error("spectrum [{lo}, {hi}] escapes the interval [{a}, {b}]")]
    Interval { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("integration did not converge: {0}")]
    Integration(String),

    #[error("weight function is nonpositive ({value}) at sample {index}")]
    Weight { index: usize, value: f64 },

    #[error("band error: {0}")]
    Band(String),

    #[error("degenerate perturbation: {0}")]
    DegeneratePerturbation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("slope undefined: {0}")]
    SlopeUndefined(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
