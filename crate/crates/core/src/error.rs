use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field evaluated on its singular set at {0:?}")]
    EvalAtSingularity(Vec<f64>),
    #[error("derivative order {order} is not supported (cap {cap})")]
    UnsupportedOrder { order: usize, cap: usize },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("field is not smooth at the evaluation point: {0}")]
    NotSmoothAtPoint(String),
    #[error("tail of the field is not integrable against the kernel of order {0}")]
    TailNotIntegrable(f64),
    #[error("oscillatory quadrature failed: {0}")]
    OscillatoryQuadratureFailure(String),
    #[error("potential diverges: {0}")]
    PotentialDiverges(String),
    #[error("point lies on the set")]
    PointOnSet,
    #[error("distance is not differentiable here (non-unique nearest point)")]
    NotDifferentiable,
    #[error("shell estimate degenerate: CI {ci} exceeds half of value {value}")]
    DegenerateShell { value: f64, ci: f64 },
    #[error("exponent fit unstable (r^2 = {r_squared})")]
    FitUnstable { r_squared: f64 },
    #[error("eps {eps} too large for outer radius {outer}")]
    EpsTooLarge { eps: f64, outer: f64 },
    #[error("reach {reach} is smaller than required {required}")]
    ReachTooSmall { reach: f64, required: f64 },
    #[error("sigma {sigma} exceeds the admissible bound {bound}")]
    SigmaTooLarge { sigma: f64, bound: f64 },
    #[error("model is not integrable: {0}")]
    ModelNotIntegrable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
