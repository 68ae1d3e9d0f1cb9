use mlwalk_bignum::BigError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error(transparent)]
    Big(#[from] BigError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Ψ bound precondition fails: {0}")]
    PsiDomain(String),
    #[error("θ₁/θ₂ is a power of Λ², so c_θ₁ = c_θ₂ trivially")]
    EquivalentThetas,
    #[error("denominator vanished at recursion step {0} (precision failure)")]
    DenominatorVanished(u32),
    #[error("no certifying n found up to {0}")]
    NoCertifyingN(u32),
}

pub type Result<T> = std::result::Result<T, CertError>;
