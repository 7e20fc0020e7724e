use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: undeclared name `{name}`")]
    Undeclared { line: usize, name: String },

    #[error("line {line}: duplicate declaration of `{name}`")]
    DuplicateDeclaration { line: usize, name: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("LSOs do not share one TBox: {0}")]
    TboxMismatch(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("target domain is inconsistent")]
    InconsistentTarget,

    #[error("no target training instances")]
    EmptyTargetTraining,

    #[error("no instances to train on")]
    EmptyInstances,

    #[error("need at least {needed} instances for {folds}-fold cross validation, got {got}")]
    TooFewInstances { needed: usize, folds: usize, got: usize },

    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible generator config: {0}")]
    Infeasible(String),

    #[error("model bundle error: {0}")]
    ModelFormat(String),

    #[error("report schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Domain errors map to exit code 2 in the CLI; everything else is treated as usage/IO.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::MissingFile(_) | Error::Parameter(_))
    }
}
