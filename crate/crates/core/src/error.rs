use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("allelic trait {value} lies outside the trait space [{min}, {max}]")]
    OutOfSpace { value: f64, min: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A model assumption (bounds, positivity of f - D, ...) is violated.
    #[error("model assumption violated: {0}")]
    Assumption(String),

    #[error("singular model: {0}")]
    SingularModel(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("step size underflow at t = {t} (h = {h:e}); the system may be stiff")]
    StepUnderflow { t: f64, h: f64 },

    #[error("quadrature failed on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("trajectory sampling too coarse: largest gap {gap} exceeds {limit}")]
    TooCoarse { gap: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfSpace { .. } => "out_of_space",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Assumption(_) => "assumption",
            Error::SingularModel(_) => "singular_model",
            Error::Precondition(_) => "precondition",
            Error::NoConvergence { .. } => "no_convergence",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::Quadrature { .. } => "quadrature",
            Error::Bracketing(_) => "bracketing",
            Error::Degenerate(_) => "degenerate",
            Error::TooCoarse { .. } => "too_coarse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
