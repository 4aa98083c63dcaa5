use thiserror::Error;

/// Errors produced by the dispersion, soliton and propagation routines.
///
/// Variants are split into two families: parameter problems (the caller asked
/// for something outside the model's domain) and numerical outcomes (the model
/// was evaluated and the answer is "no solution" or the solver failed).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SitError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no propagating carrier (K^2 = {k_squared:.6e} < 0)")]
    NoCarrier { k_squared: f64 },

    #[error("velocity pole: denominator {denominator:.3e} vanishes")]
    VelocityPole { denominator: f64 },

    #[error("non-positive pulse velocity V = {v:.6e}")]
    NegativeVelocity { v: f64 },

    #[error("no finite stopping width at x = {x}: {reason}")]
    OutOfDomain { x: f64, reason: String },

    #[error("amplitude radicand negative: no soliton (Gamma*S0 = {gamma_s0:.6e})")]
    NoSoliton { gamma_s0: f64 },

    #[error("quadrature did not converge: estimate {estimate:.12e}, error {error:.3e} after {intervals} intervals")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("no crossing found: {0}")]
    NoCrossing(String),

    #[error("infinite absorption: pulse stopped (K = {k})")]
    InfiniteAbsorption { k: f64 },

    #[error("integration step size underflow at position {at}")]
    StepSizeUnderflow { at: f64 },

    #[error("propagation unstable at position {position}: field energy grew by {growth:.3e}")]
    Instability { position: f64, growth: f64 },

    #[error("peak untrackable: {0}")]
    PeakUntrackable(String),
}

impl SitError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        SitError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by inputs outside the model's domain, as opposed
    /// to numerical outcomes of a valid evaluation.
    pub fn is_validation(&self) -> bool {
        matches!(self, SitError::InvalidParameter { .. })
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            SitError::InvalidParameter { .. } => "invalid_parameter",
            SitError::NoCarrier { .. } => "no_carrier",
            SitError::VelocityPole { .. } => "velocity_pole",
            SitError::NegativeVelocity { .. } => "negative_velocity",
            SitError::OutOfDomain { .. } => "out_of_domain",
            SitError::NoSoliton { .. } => "no_soliton",
            SitError::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
            SitError::NoCrossing(_) => "no_crossing",
            SitError::InfiniteAbsorption { .. } => "infinite_absorption",
            SitError::StepSizeUnderflow { .. } => "step_size_underflow",
            SitError::Instability { .. } => "instability",
            SitError::PeakUntrackable(_) => "peak_untrackable",
        }
    }
}

pub type Result<T> = std::result::Result<T, SitError>;
