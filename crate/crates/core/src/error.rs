use thiserror::Error;

/// Errors raised by the numerical kernels, solvers and verifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {flo}, f(hi) = {fhi})")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular finite-difference Jacobian (det = {0:e})")]
    SingularJacobian(f64),

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("ODE integration failed: {0}")]
    StepFailure(String),

    #[error("stencil error: {0}")]
    Stencil(String),

    #[error("point is not on the surface (|S| = {0:e})")]
    OffSurface(f64),
}

impl Error {
    /// True for failures of a numerical method, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::SingularJacobian(_)
                | Error::StepFailure(_)
                | Error::NoSignChange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
