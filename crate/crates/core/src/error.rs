use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing field: {0}")]
    MissingField(String),

    #[error("invalid field {field}: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("qubit current {requested:.3e} A exceeds the critical-current cap I_qmax = {cap:.3e} A")]
    CriticalCurrent { requested: f64, cap: f64 },

    #[error("schedule infeasible: lambda_K = {lambda_k:.4e} rad/s exceeds the achievable {cap:.4e} rad/s")]
    ScheduleInfeasible { lambda_k: f64, cap: f64 },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("approximation invalid: {0}")]
    ApproximationInvalid(String),

    #[error("Fock truncation leakage {population:.3e} at n_cut = {n_cut}; increase n_cut")]
    Leakage { n_cut: usize, population: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("estimation impossible: {0}")]
    EstimationImpossible(String),

    #[error("missing upstream stages: {}", .0.join(", "))]
    MissingStages(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
