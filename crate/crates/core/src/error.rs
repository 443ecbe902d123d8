use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a prime >= 2, got {0}")]
    NotPrime(u64),
    #[error("primes must satisfy p < q, got p={p}, q={q}")]
    PrimeOrder { p: u64, q: u64 },
    #[error("alpha must be a rational in (1, p]; got {num}/{den} with p={p}")]
    AlphaOutOfRange { num: u64, den: u64, p: u64 },
    #[error("invalid rational: {0}")]
    BadRational(String),
    #[error("convergent table too short (needs denominators beyond {needed}); extend the table")]
    ExtendTable { needed: u64 },
    #[error("precision escalation exhausted at {bits} bits without certifying `{what}`")]
    PrecisionExhausted { bits: u32, what: &'static str },
    #[error("the linear form interval is not strictly positive")]
    NonPositiveLinearForm,
    #[error("the S-unit 1 has no predecessor")]
    NoPredecessor,
    #[error("resource guard tripped: {0}")]
    ResourceGuard(String),
    #[error("discriminator not found below ceiling {0}")]
    DiscriminatorCeiling(u64),
    #[error("checkpoint does not match this job: {0}")]
    CheckpointMismatch(String),
    #[error("unsupported cache/checkpoint version {0}")]
    BadVersion(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
