use thiserror::Error;

/// Errors raised by grid operations, the model, the time stepper and the
/// verification labs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaxisError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field contains a non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("field minimum {min} is below the required floor {floor}")]
    NonPositiveField { min: f64, floor: f64 },
    #[error("fractional power {p} of a field with negative entry {min}")]
    NegativeFieldForFractionalPower { p: f64, min: f64 },
    #[error("initial cell density has negative entry {0}")]
    NegativeInitialData(f64),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("step size collapsed to {dt:e} at t = {t}")]
    StepCollapse { t: f64, dt: f64 },
    #[error("non-finite state at t = {0}")]
    NonFiniteState(f64),
    #[error("positivity floor {floor:e} violated: min u = {min_u:e}, min v = {min_v:e}")]
    PositivityFloorViolated { floor: f64, min_u: f64, min_v: f64 },
    #[error("inputs must be strictly positive (min = {0:e})")]
    PositivityViolated(f64),
    #[error("right-hand side vanishes while the left-hand side exceeds the eta terms")]
    DegenerateRhs,
    #[error("denominator vanishes for the zero field")]
    ZeroField,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, TaxisError>;
