use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("symbol is singular at frequency xi = {xi}")]
    SingularSymbol { xi: f64 },

    #[error("field fails boundary decay: edge max {edge:.3e} > {ratio:.1e} * max {max:.3e}")]
    BoundaryDecay { edge: f64, max: f64, ratio: f64 },

    #[error("spectral parameter {0} rejected: |kappa| must be at least 1")]
    KappaRange(f64),

    #[error("grid too large for dense path: N = {points} exceeds {cap}")]
    DenseCap { points: usize, cap: usize },

    #[error("discrete Lax operator is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("data too large: H^-1/4 norm {norm:.4} exceeds gate {gate:.4}")]
    DataTooLarge { norm: f64, gate: f64 },

    #[error("fixed point is not contracting (residual grew {streak} times, last {residual:.3e}); use smaller data or the oracle")]
    NotContracting { streak: usize, residual: f64 },

    #[error("fixed point hit max_iter = {max_iter} with residual {residual:.3e}")]
    MaxIterations { max_iter: usize, residual: f64 },

    #[error("density denominator |2 + gamma| = {min:.3e} falls below 0.5")]
    DenominatorGuard { min: f64 },

    #[error("trace series diverges: spectral radius estimate {radius:.4} >= 1")]
    DivergentTrace { radius: f64 },

    #[error("pole in current: kappa = {kappa} and varkappa = {varkappa} are too close")]
    CurrentPole { kappa: f64, varkappa: f64 },

    #[error("stability gate failed: dt * max|xi|^{order} = {value:.3e} exceeds {bound:.3e}")]
    Unstable { value: f64, bound: f64, order: u32 },

    #[error("non-finite values at t = {time}; last valid time {last_valid}")]
    NonFinite { time: f64, last_valid: f64 },

    #[error("band limit overflow: {0}")]
    BandLimit(String),

    #[error("flavor {flavor} does not match flow {flow}")]
    FlavorMismatch { flavor: String, flow: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that come from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSymbol { .. }
                | Error::IllConditioned { .. }
                | Error::NotContracting { .. }
                | Error::MaxIterations { .. }
                | Error::DenominatorGuard { .. }
                | Error::DivergentTrace { .. }
                | Error::NonFinite { .. }
                | Error::Unstable { .. }
                | Error::DataTooLarge { .. }
        )
    }
}
