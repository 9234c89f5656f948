use thiserror::Error;

use crate::chase::ChaseError;
use crate::model::ModelError;
use crate::rewrite::RewriteError;
use crate::syntax::{CsvError, ParseError};
use crate::transform::TransformError;

/// Any failure of a front-end command, with its process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// 2 parse or usage, 3 semantic, 4 class precondition, 5 cap exceeded,
    /// 6 I/O, 7 internal.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 2,
            Error::Parse { source, .. } => match source {
                ParseError::Syntax { .. } => 2,
                ParseError::Invalid { .. } => 3,
            },
            Error::Model(_) => 3,
            Error::Csv(CsvError::Io { .. }) => 6,
            Error::Csv(_) => 2,
            Error::Chase(e) => chase_code(e),
            Error::Transform(e) => transform_code(e),
            Error::Rewrite(e) => match e {
                RewriteError::NotSticky => 4,
                RewriteError::DisjunctCapExceeded(_) => 5,
                RewriteError::UnknownPredicate(_) => 3,
                RewriteError::Transform(e) => transform_code(e),
            },
            Error::Io { .. } => 6,
            Error::Internal(_) => 7,
        }
    }
}

fn chase_code(e: &ChaseError) -> u8 {
    match e {
        ChaseError::NotWeaklySticky => 4,
        ChaseError::RuleCapExceeded(_) => 5,
        ChaseError::Model(_) => 3,
    }
}

fn transform_code(e: &TransformError) -> u8 {
    match e {
        TransformError::PreconditionViolated(_) => 4,
        TransformError::IterationCap(_) => 5,
        TransformError::Chase(e) => chase_code(e),
    }
}
