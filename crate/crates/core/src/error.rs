use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("environment map must be 2:1, got {width}x{height}")]
    NotEquirect { width: usize, height: usize },

    #[error("pixel buffer holds {actual} pixels, expected {expected}")]
    BufferSize { expected: usize, actual: usize },

    #[error("invalid radiance {value} at ({col}, {row})")]
    InvalidRadiance { col: usize, row: usize, value: f32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no peak: map has no positive luminance")]
    NoPeak,

    #[error("degenerate exposure: percentile luminance is zero")]
    DegenerateExposure,

    #[error("degenerate prediction: prediction is zero under the mask")]
    DegeneratePrediction,

    #[error("zero-mean image under the mask")]
    ZeroMean,

    #[error("no pixels with non-zero color under the mask")]
    NoQualifyingPixels,

    #[error("network has non-finite parameters")]
    NonFiniteParameters,

    #[error("training diverged at step {step}: loss {loss}")]
    Divergence { step: usize, loss: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed {kind} data: {message}")]
    Format { kind: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(kind: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            kind,
            message: message.into(),
        }
    }

    /// Short stable identifier used by the command line error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotEquirect { .. } | Error::BufferSize { .. } | Error::DimensionMismatch(_) => {
                "dimension"
            }
            Error::InvalidRadiance { .. } => "radiance",
            Error::Precondition(_) => "precondition",
            Error::NoPeak => "no-peak",
            Error::DegenerateExposure => "exposure",
            Error::DegeneratePrediction | Error::ZeroMean | Error::NoQualifyingPixels => "metric",
            Error::NonFiniteParameters => "network",
            Error::Divergence { .. } => "divergence",
            Error::Empty(_) => "empty",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
        }
    }
}
