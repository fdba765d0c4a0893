use thiserror::Error;

/// Errors raised by the model, analysis and control routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VhipError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("negative leg stiffness u = {0} violates unilateral contact")]
    NegativeStiffness(f64),

    #[error("singular configuration: CoM coincides with the CoP")]
    CoincidentCop,

    #[error("invalid contact surface: {0}")]
    InvalidSurface(String),

    #[error("contact surface too close to vertical (n.ez = {0})")]
    UnsupportedOrientation(f64),

    #[error("surfaces are not coplanar (deviation {0} m)")]
    NonCoplanar(f64),

    #[error("degenerate state: CoM at or below the contact plane (height {0} m)")]
    DegenerateState(f64),

    #[error("CoP is not on the ballistic line (w = {0})")]
    NotOnBallisticLine(f64),

    #[error("degenerate vertical motion: CoM not above the CoP and no horizontal velocity")]
    DegenerateVertical,

    #[error("fixed CoP cannot capture the state (T = {t}, z_c = {z_c})")]
    NotCapturable { t: f64, z_c: f64 },

    #[error("no valid initial value for the virtual time state")]
    NoValidTg,

    #[error("singular gCCM: virtual time state is zero")]
    SingularGccm,

    #[error("critical ballistic point outside the contact surface")]
    InfeasibleCbp,

    #[error("controller domain error: {0}")]
    ControllerDomain(String),

    #[error("numerical blow-up at t = {0} s")]
    NumericalBlowup(f64),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = VhipError> = std::result::Result<T, E>;

/// Best-effort conversion of a scalar into `f64` for diagnostics.
pub(crate) fn diag<T: num_traits::ToPrimitive>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
