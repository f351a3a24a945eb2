use chrono::NaiveDate;
use megazord_neural::NeuralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required column `{0}`")]
    MissingHeader(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("series too short: {len} observations, need at least {required}")]
    SeriesTooShort { len: usize, required: usize },
    #[error("window {window} larger than series length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("{0}")]
    InvalidArgument(String),
    #[error("only {available} candidate windows, need {required}")]
    NotEnoughCandidates { available: usize, required: usize },
    #[error("test actuals never change; Theil's U is undefined")]
    DegenerateSeries,
    #[error("model was fitted on a different training series")]
    ModelSeriesMismatch,
    #[error("unsupported alpha {0}; only 0.05 is tabulated")]
    UnsupportedAlpha(f64),
    #[error("k = {0} outside the tabulated range 2..=20")]
    KOutOfTable(usize),
    #[error("invalid score matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("cannot read data: {0}")]
    DataUnreadable(String),
    #[error("every (symbol, method) cell failed")]
    AllCellsFailed,
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingHeader(_) => "MissingHeader",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::UnknownSymbol(_) => "UnknownSymbol",
            Error::DuplicateDate(_) => "DuplicateDate",
            Error::SeriesTooShort { .. } => "SeriesTooShort",
            Error::WindowTooLarge { .. } => "WindowTooLarge",
            Error::NonFiniteInput => "NonFiniteInput",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NotEnoughCandidates { .. } => "NotEnoughCandidates",
            Error::DegenerateSeries => "DegenerateSeries",
            Error::ModelSeriesMismatch => "ModelSeriesMismatch",
            Error::UnsupportedAlpha(_) => "UnsupportedAlpha",
            Error::KOutOfTable(_) => "KOutOfTable",
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::DataUnreadable(_) => "DataUnreadable",
            Error::AllCellsFailed => "AllCellsFailed",
            Error::IoFailure(_) => "IoFailure",
            Error::Neural(_) => "NeuralError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
