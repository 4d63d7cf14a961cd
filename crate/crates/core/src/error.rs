use thiserror::Error;

/// Errors shared across the solver modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sample count {0} along {1} is not a power of two")]
    NotPowerOfTwo(usize, &'static str),

    #[error("radial grid too coarse: {0} nodes, need at least 16")]
    GridTooCoarse(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fit window [{lo}, {hi}] spans less than two decades")]
    WindowTooShort { lo: f64, hi: f64 },

    #[error("source violates declared support: {0}")]
    SupportViolation(String),

    #[error("decay exponent mu = {0} unsupported (need mu >= 1)")]
    UnsupportedDecay(f64),

    #[error("screened solve needs lambda > 0, got {0}")]
    NonpositiveScreening(f64),

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("coincident points in Green's function evaluation")]
    CoincidentPoints,

    #[error("metric degenerate at node {node:?}: min eigenvalue {eig:.3e}")]
    DegenerateMetric { node: [usize; 4], eig: f64 },

    #[error("domain touches the pole of the chart: {0}")]
    ChartPole(String),

    #[error("weight not normalized: integral deviates by {0:.3e}")]
    WeightNotNormalized(f64),

    #[error("reduction stage failed to improve decay: {0}")]
    ReductionStalled(String),

    #[error("mass balance found no root in the admissible box: {0}")]
    BalanceNoRoot(String),

    #[error("positivity violated: {0}")]
    PositivityLost(String),

    #[error("Newton line search stalled at step {0:.3e}")]
    LineSearchStall(f64),

    #[error("linear solver did not converge: residual {0:.3e} after {1} iterations")]
    LinearSolveFailure(f64, usize),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
