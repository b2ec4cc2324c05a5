use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// [`Error::code`] gives a stable machine-readable name for each variant; the
/// CLI prints it as the prefix of its single-line diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("interest {interest}: negative audience {value}")]
    NegativeAudience { interest: String, value: i64 },

    #[error("{what}: audience {value} exceeds 2^53")]
    AudienceTooLarge { what: String, value: u128 },

    #[error("audience table has no entries")]
    EmptyTable,

    #[error("claimed total {claimed} does not match entry sum {actual}")]
    TotalMismatch { claimed: i64, actual: u64 },

    #[error("duplicate interest id {0}")]
    DuplicateInterest(String),

    #[error("interest id must be non-empty")]
    EmptyInterestId,

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("invalid triple: {0}")]
    InvalidTriple(String),

    #[error("tables share no interests")]
    EmptyIntersection,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("population {0} has zero total audience")]
    ZeroTotalAudience(String),

    #[error("interest ratio maps cover different interests")]
    UniverseMismatch,

    #[error("no interest is more prevalent in the destination than in the home population")]
    NoDistinctiveInterests,

    #[error("k must be in (0, 100], got {0}")]
    InvalidK(f64),

    #[error("no scores to aggregate")]
    EmptyScores,

    #[error("subset size {size} exceeds universe of {universe} interests")]
    SizeExceedsUniverse { size: usize, universe: usize },

    #[error("invalid size specification: {0}")]
    InvalidSizes(String),

    #[error("region {0} has no area")]
    MissingArea(String),

    #[error("region {0} has non-positive area")]
    NonPositiveArea(String),

    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("region mismatch: {0}")]
    RegionMismatch(String),

    #[error("series is constant; correlation undefined")]
    ConstantSeries,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("base share vectors coincide after {0} attempts")]
    DegenerateDraw(u32),

    #[error("provider unavailable for interest {interest} after {retries} retries: {last_error}")]
    ProviderUnavailable {
        interest: String,
        retries: u32,
        last_error: String,
    },

    #[error("provider response violates contract: {0}")]
    ContractViolation(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NegativeAudience { .. } => "NegativeAudience",
            Error::AudienceTooLarge { .. } => "AudienceTooLarge",
            Error::EmptyTable => "EmptyTable",
            Error::TotalMismatch { .. } => "TotalMismatch",
            Error::DuplicateInterest(_) => "DuplicateInterest",
            Error::EmptyInterestId => "EmptyInterestId",
            Error::InvalidPopulation(_) => "InvalidPopulation",
            Error::InvalidTriple(_) => "InvalidTriple",
            Error::EmptyIntersection => "EmptyIntersection",
            Error::Parse { .. } => "ParseError",
            Error::Io { .. } => "IoError",
            Error::ZeroTotalAudience(_) => "ZeroTotalAudience",
            Error::UniverseMismatch => "UniverseMismatch",
            Error::NoDistinctiveInterests => "NoDistinctiveInterests",
            Error::InvalidK(_) => "InvalidK",
            Error::EmptyScores => "EmptyScores",
            Error::SizeExceedsUniverse { .. } => "SizeExceedsUniverse",
            Error::InvalidSizes(_) => "InvalidSizes",
            Error::MissingArea(_) => "MissingArea",
            Error::NonPositiveArea(_) => "NonPositiveArea",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::RegionMismatch(_) => "RegionMismatch",
            Error::ConstantSeries => "ConstantSeries",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateDraw(_) => "DegenerateDraw",
            Error::ProviderUnavailable { .. } => "ProviderUnavailable",
            Error::ContractViolation(_) => "ContractViolation",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
