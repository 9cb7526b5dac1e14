use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field context mismatch: element of GF(3^{found}) used with GF(3^{expected})")]
    ContextMismatch { expected: u32, found: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("extension degree {m} is not supported (must be 1..={max})")]
    UnsupportedDegree { m: u32, max: u32 },
    #[error("subfield degree {d} does not divide extension degree {m}")]
    NotASubfield { d: u32, m: u32 },
    #[error("Artin-Schreier equation has no solution in the field")]
    NoSolution,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point sampling exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: u64 },
    #[error("series precision {prec} too small; index {needed} requested")]
    PrecisionShortfall { needed: u64, prec: u64 },
    #[error("derivative index {index} out of range (max {max})")]
    IndexOutOfRange { index: u64, max: u64 },
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("zero element has no pole order")]
    ZeroElement,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("rank deficiency unresolved: {0}")]
    RankDeficiency(String),
    #[error("audit mismatch: {0}")]
    AuditMismatch(String),
    #[error("overflow: {0}")]
    Overflow(String),
}
