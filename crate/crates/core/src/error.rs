use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("adaptive quadrature on [{a}, {b}] stopped at estimated error {err:e} (requested {tol:e})")]
    QuadratureNonconvergence { a: f64, b: f64, err: f64, tol: f64 },

    #[error("improper integral tail did not settle before t = {reached:e}")]
    TailNonconvergence { reached: f64 },

    #[error("{what} = {value} lies outside the tabulated range [0, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        max: f64,
    },

    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("non-integrable singularity: {0}")]
    NonIntegrable(String),

    #[error("test function support escapes the quadrature domain: {0}")]
    SupportEscape(String),

    #[error("time step {dt} violates the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonconvergence { .. }
                | Error::TailNonconvergence { .. }
                | Error::Cfl { .. }
                | Error::NonIntegrable(_)
                | Error::Singular(_)
        )
    }
}
