use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two vectors that must have equal length did not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A weight vector does not satisfy the unit-norm constraint.
    #[error("weight vector not normalized: sum of squares is {sum_sq}")]
    NotNormalized { sum_sq: f64 },

    /// The requested expression is undefined for these parameters.
    #[error("singular parameters: {0}")]
    Singular(String),

    /// Exact enumeration would exceed the configured cap.
    #[error("enumeration of {evaluations} codewords exceeds the cap of {cap}")]
    EnumerationCap { evaluations: u128, cap: u128 },

    /// The estimated simulation cost exceeds the configured budget.
    #[error("simulation cost {cost} exceeds the budget of {budget}")]
    CostBudget { cost: u128, budget: u128 },

    /// A symbol is not a point of the constellation in use.
    #[error("symbol {re}{im:+}i is not a constellation point")]
    NotInConstellation { re: f64, im: f64 },

    /// A configuration value was rejected by a validity check.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
