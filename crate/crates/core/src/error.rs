use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("TLS input: {0}")]
    TlsInputPath(&'static str),

    #[error("truncation `{name}` = {value} is below the minimum of {min}")]
    Truncation {
        name: &'static str,
        value: usize,
        min: usize,
    },

    #[error("transition frequency {0} is not positive (level inversion)")]
    NonPositiveFrequency(f64),

    #[error("net heating: (Γ− − Γ+) + γm = {0:e} is not positive")]
    NetHeating(f64),

    #[error("outside the dispersive regime: |δω| = {detuning} < 4λ̄ = {limit}")]
    NotDispersive { detuning: f64, limit: f64 },

    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular at column {column}")]
    Singular { column: usize },

    #[error(
        "steady state is not unique: pivot ratio {pivot_ratio:e} indicates a degenerate null space"
    )]
    DegenerateSteadyState { pivot_ratio: f64 },

    #[error("steady-state solve did not converge: relative residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("steady state is not positive: minimum eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Failures of the numerical solve, as opposed to bad input.
    pub fn is_solver_error(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::DegenerateSteadyState { .. }
                | Error::NotConverged { .. }
                | Error::NotPositive(_)
                | Error::NetHeating(_)
                | Error::NonPositiveFrequency(_)
        )
    }
}
