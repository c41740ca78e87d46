use num_bigint::BigUint;
use thiserror::Error;

/// Errors produced by validation, the exact engines and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CcpError {
    #[error("probability p[{index}] = {value} is not strictly positive")]
    NonPositiveProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("invalid bounds n={n}, k={k}, t={t} (need 1 <= k <= n and t >= 1)")]
    BadBounds { n: usize, k: usize, t: usize },

    #[error("distribution has {got} coupons, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is terminal and has no successors")]
    TerminalState,

    #[error("ancestor has complete-coupon mass {p_complete} and never leaves")]
    AbsorbingAncestor { p_complete: f64 },

    #[error("the multiplicity engine requires a uniform drawing distribution")]
    NotUniform,

    #[error("engine {requested} cannot run this instance: {reason}")]
    EngineMismatch { requested: String, reason: String },

    #[error("state cap {cap} exceeded{}", predicted.as_ref().map(|p| format!(" (predicted {p} states)")).unwrap_or_default())]
    Overflow { cap: u64, predicted: Option<BigUint> },

    #[error("raw chain has {states} states, oracle cap is {cap}")]
    TooLarge { states: u128, cap: u128 },

    #[error("linear solve failed: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl CcpError {
    /// True for errors caused by the instance itself rather than resources or numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            CcpError::NonPositiveProbability { .. }
                | CcpError::NotNormalized { .. }
                | CcpError::BadBounds { .. }
                | CcpError::DimensionMismatch { .. }
                | CcpError::NotUniform
                | CcpError::EngineMismatch { .. }
                | CcpError::InvalidInput(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CcpError::NonPositiveProbability { .. } => "NonPositiveProbability",
            CcpError::NotNormalized { .. } => "NotNormalized",
            CcpError::BadBounds { .. } => "BadBounds",
            CcpError::DimensionMismatch { .. } => "DimensionMismatch",
            CcpError::TerminalState => "TerminalState",
            CcpError::AbsorbingAncestor { .. } => "AbsorbingAncestor",
            CcpError::NotUniform => "NotUniform",
            CcpError::EngineMismatch { .. } => "EngineMismatch",
            CcpError::Overflow { .. } => "Overflow",
            CcpError::TooLarge { .. } => "TooLarge",
            CcpError::Numerical(_) => "Numerical",
            CcpError::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, CcpError>;
