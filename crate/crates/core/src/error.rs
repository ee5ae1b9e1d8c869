use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("dimension mismatch: expected {expected}, found {found}")]
pub struct DimensionError {
    pub expected: usize,
    pub found: usize,
}

impl DimensionError {
    pub fn new(expected: usize, found: usize) -> Self {
        Self { expected, found }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("objective is not finite when probing coordinate {coordinate}")]
    Domain { coordinate: usize },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("secant denominator vanished (phi_prev = phi_cur = {value})")]
    DegenerateSecant { value: f64 },
    #[error("derivative vanished at x = {x}")]
    DegenerateDerivative { x: f64 },
    #[error("need at least {needed} usable history entries, found {usable}")]
    InsufficientHistory { usable: usize, needed: usize },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("directional curvature must be positive, got {0}")]
    Curvature(f64),
    #[error("step rule needs a smoothness constant and the objective does not provide one")]
    MissingSmoothness,
    #[error("smoothness estimate doubled {0} times without passing the sufficient-decrease test")]
    AdaptivityFailure(usize),
    #[error("no improving step found after {0} halvings")]
    NoImprovement(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmoError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("gradient is not finite")]
    NonFinite,
    #[error("extreme eigen/singular vector did not converge within {0} iterations")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("initial point is outside the objective's domain")]
    InfeasibleStart,
    #[error("linear minimization oracle failed at iteration {t}: {source}")]
    Lmo { t: usize, source: LmoError },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown problem class `{0}`")]
    UnknownClass(String),
    #[error("size {size} is outside the supported range {min}..={max} for {class}")]
    UnsupportedSize {
        class: &'static str,
        size: usize,
        min: usize,
        max: usize,
    },
}
