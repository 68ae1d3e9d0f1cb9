use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BigError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid power domain: {0}")]
    InvalidPowerDomain(String),
    #[error("logarithm of a non-positive number")]
    NonPositiveLog,
    #[error("cannot parse `{0}` as a decimal number")]
    Parse(String),
    #[error("precision agreement requires P2 >= P1 + 20 (got P1={p1}, P2={p2})")]
    PrecisionGap { p1: u32, p2: u32 },
}
