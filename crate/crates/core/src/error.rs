use thiserror::Error;

/// Errors raised by model evaluation, integration and fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input lies outside the region where a closed-form expression is finite.
    #[error("{quantity} is undefined at flux {flux} rad")]
    Domain { quantity: &'static str, flux: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// The integrator step violates the `dt * gamma <= 0.01` accuracy guard.
    #[error("step size guard violated: dt*gamma = {dt_gamma:.3e} > 0.01")]
    StepGuard { dt_gamma: f64 },

    #[error("integration diverged: non-finite state at step {index}")]
    Diverged { index: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("rank-deficient Jacobian: {0}")]
    RankDeficient(String),

    /// Data carries no information about the requested parameters.
    #[error("degenerate fit: {0}")]
    Degenerate(String),
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. }
                | Error::NonConvergence { .. }
                | Error::RankDeficient(_)
                | Error::Degenerate(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
