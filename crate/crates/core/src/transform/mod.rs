//! ReduceRank and partial grounding: compiling a weakly-sticky program into
//! a sticky one with the same certain answers.

mod grounding;
mod reduce_rank;

pub use grounding::{
    partial_grounding, partial_grounding_restricted, restrict_grounding_domain, weak_variables,
    GroundingDomains, WeakVariableReport,
};
pub use reduce_rank::{
    reduce_rank, reduce_rank_traced, ExpansionMap, ReduceRankOutput, ReduceRankStep,
};

use thiserror::Error;

use crate::chase::ChaseError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("rank reduction did not finish within {0} iterations")]
    IterationCap(usize),
    #[error(transparent)]
    Chase(#[from] ChaseError),
}
