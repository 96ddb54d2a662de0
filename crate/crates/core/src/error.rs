use thiserror::Error;

/// Errors raised while building a lattice or pricing on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The diffusion up-probability falls outside [0, 1]; `ratio` is α√Δt/σ.
    #[error("diffusion probability out of range: |alpha*sqrt(dt)/sigma| = {ratio:.6} > 1 (increase n)")]
    InvalidProbability { ratio: f64 },

    #[error("degenerate jump law: gamma' = delta = 0 with lambda > 0")]
    DegenerateJump,

    /// A moment-matched jump probability is materially negative.
    #[error("negative jump probability q[{level}] = {value:e} (jump intensity per step too large; increase n)")]
    NegativeProbability { level: i64, value: f64 },

    #[error("singular moment-matching system")]
    SingularSystem,

    /// A logarithm or similar would be evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Brute-force enumeration refused because the path count is too large.
    #[error("enumeration too large: {paths} paths exceeds cap {cap}")]
    SizeCap { paths: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, PricingError>;

pub(crate) fn invalid(msg: impl Into<String>) -> PricingError {
    PricingError::InvalidArgument(msg.into())
}
