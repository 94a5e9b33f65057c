use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point depth {depth} is not in front of the camera")]
    NonPositiveDepth { depth: f64 },
    #[error("noise sigma must be non-negative, got {0}")]
    NegativeSigma(f64),
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("insufficient samples for `{point_id}`: need at least {needed}, got {got}")]
    TooFewSamples {
        point_id: String,
        needed: usize,
        got: usize,
    },
    #[error("non-uniform sampling in `{point_id}` at sample {index}")]
    NonUniformSampling { point_id: String, index: usize },
    #[error("timestamps of `{point_id}` are not strictly increasing at sample {index}")]
    NonMonotonicTime { point_id: String, index: usize },

    #[error("zero displacement: omega^2 = -ydd/y is undefined at y = 0")]
    ZeroDisplacement,
    #[error("coincident displacements: y1 and y2 are equal")]
    CoincidentDisplacements,
    #[error("omega^2 must be positive to recover the center offset, got {0}")]
    NonPositiveOmegaSq(f64),
    #[error("timestamp mismatch between `{first}` and `{second}`")]
    TimestampMismatch { first: String, second: String },

    #[error("no estimates to segment")]
    EmptyInput,

    #[error("malformed header: expected `t,point_id,y`, found `{0}`")]
    MalformedHeader(String),
    #[error("line {line}: {reason}")]
    NonNumericField { line: usize, reason: String },
    #[error("duplicate timestamp {t} for point `{point_id}`")]
    DuplicateTimestamp { point_id: String, t: f64 },
    #[error("track file contains no records")]
    EmptyFile,
    #[error("estimates document: {0}")]
    Schema(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
