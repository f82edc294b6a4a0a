use thiserror::Error;

/// Errors produced anywhere in the extraction pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequences have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("signal has {len} samples, at least {min} required")]
    TooShort { len: usize, min: usize },

    #[error("times are not strictly increasing at index {index}")]
    NonIncreasingTimes { index: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("phase is not strictly increasing at index {index}")]
    NonMonotonePhase { index: usize },

    #[error("phase spans {l_theta} periods, at least {min} required")]
    TooFewPeriods { l_theta: usize, min: usize },

    #[error("phase spans {periods:.4} periods, more than 0.1 away from an integer")]
    NotNearIntegerPeriods { periods: f64 },

    #[error("grid size {n} is not a power of two")]
    NotPowerOfTwo { n: usize },

    #[error("grid size {n} is below 4 * l_theta = {min}")]
    GridTooCoarse { n: usize, min: usize },

    #[error(
        "band {k} (l_theta = {l_theta}) exceeds the Nyquist limit of an n = {n} grid; \
         lower K or raise n"
    )]
    BandExceedsNyquist { k: usize, l_theta: usize, n: usize },

    #[error("bands have mismatched lengths ({expected} vs {found})")]
    MismatchedLengths { expected: usize, found: usize },

    #[error("rank-1 factors are degenerate: {0}")]
    DegenerateFactors(&'static str),

    #[error("matrix has zero Frobenius norm")]
    DegenerateInput,

    #[error("singular value decomposition did not converge")]
    NonConvergence,

    #[error("window around sample {center} is too short: {periods:.3} periods available")]
    WindowTooShort { center: usize, periods: f64 },

    #[error("no unique dominant fundamental in the spectrum: {0}")]
    AmbiguousFundamental(String),

    #[error("estimated phase is not monotone at index {index}")]
    NonMonotoneEstimate { index: usize },

    #[error("ODE state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("parse error at line {line}: {message}")]
    ParseError { line: u64, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name, used in CLI diagnostics and FFI status mapping.
    pub fn name(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::TooShort { .. } => "TooShort",
            Error::NonIncreasingTimes { .. } => "NonIncreasingTimes",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::NonMonotonePhase { .. } => "NonMonotonePhase",
            Error::TooFewPeriods { .. } => "TooFewPeriods",
            Error::NotNearIntegerPeriods { .. } => "NotNearIntegerPeriods",
            Error::NotPowerOfTwo { .. } => "NotPowerOfTwo",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::BandExceedsNyquist { .. } => "BandExceedsNyquist",
            Error::MismatchedLengths { .. } => "MismatchedLengths",
            Error::DegenerateFactors(_) => "DegenerateFactors",
            Error::DegenerateInput => "DegenerateInput",
            Error::NonConvergence => "NonConvergence",
            Error::WindowTooShort { .. } => "WindowTooShort",
            Error::AmbiguousFundamental(_) => "AmbiguousFundamental",
            Error::NonMonotoneEstimate { .. } => "NonMonotoneEstimate",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::ParseError { .. } => "ParseError",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
