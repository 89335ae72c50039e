use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock space truncated too early: top-level population {population:e} exceeds {limit:e}")]
    Truncation { population: f64, limit: f64 },

    #[error("time {t} ms outside the ramp [0, {t_final}] ms")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("ground state is degenerate (gap {gap:e} rad/ms)")]
    DegenerateGroundState { gap: f64 },

    #[error("reference levels are degenerate (gap {gap:e} rad/ms)")]
    DegenerateLevels { gap: f64 },

    #[error("integrator could not meet the tolerance at t = {t} ms (step {step:e} ms)")]
    ToleranceNotMet { t: f64, step: f64 },

    #[error("{quantity} drifted by {drift:e}, limit {limit:e}")]
    InvariantViolated { quantity: &'static str, drift: f64, limit: f64 },

    #[error("density matrix lost positivity at t = {t} ms (min eigenvalue {min_eigenvalue:e})")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("Hermitian eigensolver did not converge")]
    EigensolverFailure,

    #[error("expectation of a Hermitian operator has imaginary part {imag:e}")]
    NonRealExpectation { imag: f64 },

    #[error("signal variance is zero")]
    ZeroVariance,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Rejected inputs, as opposed to a computation that could not finish.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } | Error::TimeOutOfRange { .. }
        )
    }
}
