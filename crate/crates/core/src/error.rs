use thiserror::Error;

/// Errors raised by the geometry, operator, energy and flow layers.
#[derive(Debug, Error)]
pub enum CurveError {
    #[error("grid size {0} is invalid: need an even count of at least 16")]
    InvalidGrid(usize),

    #[error("field length {found} does not match grid size {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("metric must be strictly positive, found {0:e}")]
    NonPositiveMetric(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("closure projection did not converge after {iterations} iterations (residual {residual:e})")]
    ClosureNotConverged { iterations: usize, residual: f64 },

    #[error("closure residual {residual:e} lies outside the projection basin (limit {limit:e})")]
    OutsideClosureBasin { residual: f64, limit: f64 },

    #[error("Helmholtz operator is not invertible (smallest eigenvalue {min_eig:e})")]
    SingularHelmholtz { min_eig: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nodal model violates {0}")]
    NodalModel(String),

    #[error("transition gap {gap:e} is too small for epsilon {epsilon:e}")]
    TransitionGap { gap: f64, epsilon: f64 },

    #[error("membrane density dropped to {min:e} at t = {t:e}")]
    DensityCollapse { min: f64, t: f64 },

    #[error("time step {dt:e} fell below the minimum {dt_min:e} at t = {t:e}")]
    StepTooSmall { dt: f64, dt_min: f64, t: f64 },

    #[error("state became non-finite at t = {0:e}")]
    Blowup(f64),
}

pub type Result<T> = std::result::Result<T, CurveError>;
