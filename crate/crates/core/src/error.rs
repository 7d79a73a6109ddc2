use thiserror::Error;

use crate::kernels::ModelTag;

/// Errors raised by parameter validation and numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha = {0} is outside (0, 2]")]
    AlphaOutOfRange(f64),

    #[error("time t = {0} must be positive and finite")]
    NonPositiveTime(f64),

    #[error(
        "skewness theta = {0} is not supported; only the symmetric case theta = 0 is implemented"
    )]
    Asymmetric(f64),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("alpha = 1 is singular for the Grünwald-Letnikov walk")]
    GlSingularAlpha,

    #[error("{model:?}: {name} = {value} violates the admissibility bound 0 < {name} <= {bound}")]
    CoeffOutOfBound {
        model: ModelTag,
        name: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("the mu parameterisation of the Gillis-Weiss walk is undefined at alpha = 2 (b(2) = 0); use lambda")]
    MuFormAtAlphaTwo,

    #[error("{0:?} has no lattice transition kernel")]
    NoLatticeKernel(ModelTag),

    #[error("quadrature budget exceeded: {required} panels required, limit is {limit}")]
    QuadratureBudget { required: usize, limit: usize },

    #[error("riemann_zeta requires s > 1, got {0}")]
    ZetaDomain(f64),

    #[error("integral diverges: {0}")]
    Divergent(&'static str),

    #[error("value {value} is outside the open unit interval (0, 1)")]
    ProbabilityOutOfRange { value: f64 },

    #[error("window [{min}, {max}] does not contain the origin")]
    WindowExcludesOrigin { min: i64, max: i64 },

    #[error("window [{min}, {max}] is empty")]
    EmptyWindow { min: i64, max: i64 },

    #[error("density is negative ({value}) at x = {x}")]
    NegativeDensity { x: f64, value: f64 },

    #[error("time mismatch: target t = {target}, realized t_n = {realized}")]
    TimeMismatch { target: f64, realized: f64 },

    #[error("scaling relation yields n = round(t / tau) = 0 for t = {t}, tau = {tau}")]
    ZeroSteps { t: f64, tau: f64 },

    #[error("empty sample set")]
    EmptySamples,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
