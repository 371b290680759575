use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain. `field` names the offending parameter.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("normalization of the light-particle wave function violated: integral of |chi|^2 = {integral} (tolerance {tolerance})")]
    Normalization { integral: f64, tolerance: f64 },

    #[error("quadrature did not resolve the integrand: {reason} (estimated error {estimated_error:e})")]
    Quadrature { reason: String, estimated_error: f64 },

    #[error("gaussian parameters are not normalizable: 4AC - B^2 = {discriminant}")]
    NotNormalizable { discriminant: f64 },

    #[error("gaussian tail at the grid boundary is {ratio:e} of the peak (limit {limit:e})")]
    TailTruncation { ratio: f64, limit: f64 },

    #[error("kernel is not twice differentiable at the origin; no quadratic approximation exists")]
    NotDifferentiable,

    #[error("derivative check failed: {quantity} from finite differences is {finite_difference}, stored value is {stored}")]
    InconsistentMoments {
        quantity: &'static str,
        finite_difference: f64,
        stored: f64,
    },

    #[error("decoherence kernel amplifies coherence: Re Lambda = {value} < 0 at xi = {xi}")]
    Amplification { xi: f64, value: f64 },

    #[error("non-finite value in the Wigner function at step time {time}")]
    NonFinite { time: f64 },

    #[error("mass leaked through the momentum boundary: relative outflow {outflow:e}")]
    BoundaryOutflow { outflow: f64 },

    #[error("no finite equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("need at least {needed} snapshots, got {got}")]
    InsufficientSnapshots { needed: usize, got: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
