use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "gamma_dt = {gamma} must exceed 3/4 so the one-step factor stays bounded away from zero"
    )]
    GammaRestriction { gamma: f64 },

    #[error("mean-square base {base} is not positive; the step size is too large")]
    NonPositiveBase { base: f64 },

    #[error("remainder series does not contract: q = {q} >= 1")]
    SeriesDivergent { q: f64 },

    #[error("implicit step is ill-posed: 1 - lambda*theta*dt = {denominator} <= 0")]
    ImplicitPole { denominator: f64 },

    #[error("theta-scheme factor is not bounded away from zero: eta - 1/(2(1 - lambda*theta*dt)) = {margin} <= 0")]
    ThetaRestriction { margin: f64 },

    #[error("log argument {argument} is not positive")]
    NonPositiveLogArgument { argument: f64 },

    #[error(
        "quadrature did not converge: {nodes} and {reference_nodes} nodes differ by {difference:e}"
    )]
    QuadratureNotConverged {
        nodes: usize,
        reference_nodes: usize,
        difference: f64,
    },

    #[error("x = {x} lies outside the domain x > {bound}")]
    OutOfDomain { x: f64, bound: f64 },

    #[error("path grids do not match: {0}")]
    GridMismatch(String),

    #[error("convergence fit undefined: {0}")]
    FitUndefined(String),
}

impl Error {
    /// Stable machine-readable identifier for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GammaRestriction { .. } => "gamma_restriction",
            Error::NonPositiveBase { .. } => "non_positive_base",
            Error::SeriesDivergent { .. } => "series_divergent",
            Error::ImplicitPole { .. } => "implicit_pole",
            Error::ThetaRestriction { .. } => "theta_restriction",
            Error::NonPositiveLogArgument { .. } => "non_positive_log_argument",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::FitUndefined(_) => "fit_undefined",
        }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
