use crate::expr::{Axis, DomainError, EvalError, ParseError, Point};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("{what} vanishes or changes sign on the domain (near {point:?})")]
    Vanishing { what: String, point: Point },
    #[error("{what} is identically zero on the domain")]
    IdenticallyZero { what: String },
    #[error("{what} cannot be evaluated on most of the domain")]
    NotEvaluable { what: String },
    #[error("{what} must not depend on {axis}")]
    ForbiddenDependence { what: String, axis: Axis },
    #[error("{what} is not separable (cross-ratio witness {witness:?})")]
    NotSeparable { what: String, witness: [f64; 4] },
    #[error("singular Jacobian at {0:?}")]
    SingularJacobian(Point),
    #[error("{0}")]
    FamilyMismatch(String),
    #[error("operands live on different domains")]
    DomainMismatch,
    #[error("{what} is not positive on the domain (near {point:?})")]
    NonPositive { what: String, point: Point },
    #[error("inverse map failed to converge for target {target} on axis {axis}")]
    InverseFailed { axis: Axis, target: f64 },
    #[error("point {0:?} is outside the domain")]
    OutsideDomain(Point),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
