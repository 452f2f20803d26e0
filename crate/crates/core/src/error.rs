use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty node set")]
    EmptyNodeSet,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sample values")]
    NoSampleValues,

    #[error("dataset too small: need at least 2 points, got {0}")]
    DatasetTooSmall(usize),

    #[error("explanation point not routed")]
    ExplanationPointNotRouted,

    #[error("degenerate partition: {inliers} inliers, {outliers} outliers")]
    DegeneratePartition { inliers: usize, outliers: usize },

    #[error("no positive labels")]
    NoPositives,

    #[error("labels contain a single class")]
    SingleClass,

    #[error("nothing to select: need at least 2 features, got {0}")]
    NothingToSelect(usize),

    #[error("labels required")]
    LabelsRequired,

    #[error("scoremap requires 2-d models (model has {0} features)")]
    ScoremapDimension(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: row {row}, column {column}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("model file line {line}: {message}")]
    Model { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
