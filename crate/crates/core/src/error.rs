use thiserror::Error;

#[derive(Debug, Error)]
pub enum SleError {
    #[error("kappa must lie in (0, 8), got {0}")]
    InvalidKappa(f64),
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("point {0} is not in the closed upper half-plane")]
    BelowRealLine(usize),
    #[error("degenerate point configuration: {0}")]
    DegenerateConfig(String),
    #[error("point must be interior to the upper half-plane: {0}")]
    NotInterior(String),
    #[error("Mobius map is degenerate (ad - bc = {0} <= 0)")]
    DegenerateMap(f64),
    #[error("boundary point {0} present; the interior Green bound needs Im z > 0")]
    BoundaryPointPresent(usize),
    #[error("geometry invariant violated: {0}")]
    GeometryInvariant(String),
    #[error("radius {radius} is below the resolution floor {floor}")]
    BelowResolutionFloor { radius: f64, floor: f64 },
    #[error("numerical branch violation: vertex {index} has Im = {im}")]
    BranchViolation { index: usize, im: f64 },
    #[error("simulation exceeded {0} steps before leaving the escape disk")]
    StepBudgetExceeded(usize),
    #[error("exponent fit needs at least 3 radii, got {0}")]
    TooFewRadii(usize),
    #[error("estimate at radius {0} is zero; increase the sample count")]
    ZeroEstimate(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("config hash mismatch: manifest has {stored}, config gives {computed}")]
    ConfigHashMismatch { stored: String, computed: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SleError>;
