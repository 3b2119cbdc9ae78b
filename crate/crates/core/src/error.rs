use thiserror::Error;

pub type Result<T> = std::result::Result<T, PdmaError>;

#[derive(Debug, Error)]
pub enum PdmaError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Phase-I found no strictly feasible point. `certificate` is the
    /// smallest achievable maximum constraint violation (non-negative).
    #[error("power allocation infeasible (phase-I optimum s = {certificate:.3e})")]
    Infeasible { certificate: f64 },

    #[error("Newton centering did not converge after {iterations} steps (t = {t:.3e}, decrement = {decrement:.3e})")]
    NotConverged {
        iterations: usize,
        t: f64,
        decrement: f64,
        iterate: Vec<f64>,
    },

    #[error("search space of 2^{bits} candidates exceeds the enumeration limit")]
    SearchTooLarge { bits: usize },

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<PdmaError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl PdmaError {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            PdmaError::Infeasible { .. } | PdmaError::NotConverged { .. } => true,
            PdmaError::Trial { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
