use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("user and base station are at the same position ({x}, {y})")]
    CoincidentPositions { x: f64, y: f64 },

    #[error(
        "scatter radius {scatter_radius} m is not smaller than the user-BS distance {distance} m"
    )]
    ScatterRingEnclosesBs { scatter_radius: f64, distance: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("requested {count} orthogonal pilots but the pilot length is only {length}")]
    TooManyPilots { count: usize, length: usize },

    #[error("linear system is singular (zero noise with rank-deficient covariances)")]
    SingularSystem,

    #[error("true channel is zero, normalized error is undefined")]
    ZeroChannel,

    #[error("no desired angular region exists for M={antennas}, spread={spread} rad")]
    NoDesiredRegion { antennas: usize, spread: f64 },

    #[error("assignment problem is infeasible: {0}")]
    Infeasible(String),

    #[error("search space of {size} exceeds the exhaustive limit of {limit}")]
    SearchSpaceTooLarge { size: f64, limit: f64 },

    #[error("utility matrix has a negative entry ({value}) at ({row}, {col})")]
    NegativeUtility { row: usize, col: usize, value: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("{path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid experiment configuration: {0}")]
    InvalidExperiment(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}
