use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Error {
    /// True when the failure is a solver convergence failure somewhere down the stack.
    pub fn is_convergence(&self) -> bool {
        match self {
            Error::Svm(SvmError::Convergence { .. }) => true,
            Error::Eval(EvalError::Fold { source, .. }) => source.is_convergence(),
            _ => false,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate recording id `{id}`")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("unknown class label `{0}` (expected neurotypical, dysarthria or aos)")]
    UnknownLabel(String),
    #[error("{path}: {message}")]
    Audio { path: PathBuf, message: String },
    #[error("{path}: unsupported audio format: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },
    #[error("{path}: trim span ({lead}s + {trail}s) does not fit a {duration:.3}s file")]
    Trim {
        path: PathBuf,
        lead: f64,
        trail: f64,
        duration: f64,
    },
    #[error("cannot resample from {from} Hz to {to} Hz")]
    Resample { from: u32, to: u32 },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspError {
    #[error("signal of {len} samples is shorter than one {window}-sample window")]
    TooShort { len: usize, window: usize },
    #[error("need at least {needed} samples for a shape fit, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("all samples are zero")]
    AllZero,
    #[error("empty input")]
    Empty,
    #[error("invalid analysis configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("recording `{id}`: {message}")]
    Extraction { id: String, message: String },
    #[error("insufficient material: {0}")]
    Insufficient(String),
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error("feature table: {0}")]
    Table(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("cannot select {n_f} of {available} features")]
    CountOutOfRange { n_f: usize, available: usize },
    #[error("feature matrix contains non-finite values")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("training data is empty or ragged")]
    BadShape,
    #[error("training data contains non-finite values")]
    NonFinite,
    #[error("invalid hyperparameters: {0}")]
    HyperParams(String),
    #[error("solver did not converge after {iterations} iterations (KKT gap {gap:.3e})")]
    Convergence { iterations: usize, gap: f64 },
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error("no feature with non-zero training variance among the selected ones")]
    NoUsableFeature,
}

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("artifact schema version {found} is not supported (this build reads {supported}.x)")]
    Version { found: String, supported: u32 },
    #[error("artifact checksum mismatch")]
    Checksum,
    #[error("malformed artifact: {0}")]
    Malformed(String),
    #[error("artifact holds a `{found}` model, expected `{expected}`")]
    Kind { found: String, expected: String },
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("class `{class}` has {count} recordings, fewer than {folds} folds")]
    ClassTooSmall {
        class: String,
        count: usize,
        folds: usize,
    },
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("training rows lack class `{0}`")]
    MissingClass(String),
    #[error("group `{0}` has no recordings")]
    EmptyGroup(String),
    #[error("no scheme requested")]
    NoScheme,
    #[error("unknown recording id `{0}`")]
    UnknownRecording(String),
    #[error("judge `{judge}`, recording `{recording}`: {message}")]
    InconsistentResponse {
        judge: String,
        recording: String,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("repetition {repetition}, fold {fold}: {source}")]
    Fold {
        repetition: usize,
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid cohort request: {0}")]
    Cohort(String),
    #[error("invalid protocol configuration: {0}")]
    Config(String),
}
