use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no training rows: every label is 0")]
    EmptyTrainingSet,
    #[error("class {0} has no labeled rows")]
    MissingClass(u32),
    #[error("label {label} at row {row} is outside 0..={num_classes}")]
    LabelOutOfRange { row: usize, label: u32, num_classes: u32 },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("spearman kernel needs at least 2 dimensions, got {0}")]
    DegenerateLength(usize),
    #[error("pooled covariance is not positive-definite after ridge")]
    SingularCovariance,
    #[error("class {0} absent from LDA training rows")]
    ClassAbsent(u32),
    #[error("LDA needs at least {needed} training rows, got {found}")]
    TooFewTrainingRows { needed: usize, found: usize },
    #[error("model has not been fitted")]
    NotFitted,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("kernel list must contain the inner-product kernel")]
    NoBaselineKernel,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("analytic means unavailable: {0}")]
    UnsupportedSetting(String),
    #[error("cannot split {n} samples into {folds} folds")]
    TooFewSamples { n: usize, folds: usize },
    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of the outside world (files, streams) rather than of inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
