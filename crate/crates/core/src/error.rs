use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the toolkit. Every variant maps to a stable,
/// machine-readable category string used by the command-line front-end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("incompatible problem: {0}")]
    Incompatible(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("no convergence after {iterations} iterations (last relative residual {last_residual:.3e})")]
    Convergence {
        iterations: usize,
        last_residual: f64,
        history: Vec<f64>,
    },

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Contract(_) => "contract",
            Error::Geometry(_) => "geometry",
            Error::Regime(_) => "regime",
            Error::Resource(_) => "resource",
            Error::Configuration(_) => "configuration",
            Error::Incompatible(_) => "incompatible",
            Error::Infeasible(_) => "infeasible",
            Error::Input(_) => "input",
            Error::Alignment(_) => "alignment",
            Error::Convergence { .. } => "convergence",
            Error::LinearSolver(_) => "linear-solver",
            Error::Io(_) => "io",
            Error::Serialization(_) | Error::Csv(_) => "serialization",
        }
    }
}
