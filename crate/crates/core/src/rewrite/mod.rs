//! UCQ rewriting for sticky rule sets, SQL output, and the hybrid answering
//! pipeline for weakly-sticky programs.

mod sql;
mod ucq;

pub use sql::{emit_sql, missing_predicates, SqlSchema, SqlTable};
pub use ucq::{
    evaluate_ucq, rewrite_sticky, rewrite_sticky_over, subsumes, UCQRewriting,
    DEFAULT_MAX_DISJUNCTS,
};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::analysis::classify;
use crate::model::{ConjunctiveQuery, Program, Term};
use crate::transform::{partial_grounding, reduce_rank, TransformError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("rule set is not sticky")]
    NotSticky,
    #[error("rewriting exceeded the cap of {0} disjuncts")]
    DisjunctCapExceeded(usize),
    #[error("no table for predicate {0}")]
    UnknownPredicate(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Intermediate artifacts of [`hybrid_answer`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridRun {
    pub reduced: Program,
    pub query: ConjunctiveQuery,
    pub grounded: Program,
    pub rewriting: UCQRewriting,
    pub answers: BTreeSet<Vec<Term>>,
}

/// ReduceRank, then partial grounding, then rewriting of the transformed
/// query over the resulting sticky rules, evaluated on the database. The
/// rewriting skips disjuncts that cannot match this database (see
/// [`rewrite_sticky_over`]).
pub fn hybrid_pipeline(
    program: &Program,
    query: &ConjunctiveQuery,
) -> Result<HybridRun, RewriteError> {
    if !classify(&program.rules).weakly_sticky {
        return Err(
            TransformError::PreconditionViolated("program is not weakly sticky".into()).into(),
        );
    }
    let (reduced, query) = reduce_rank(program, query)?;
    let grounded = partial_grounding(&reduced)?;
    let rewriting = rewrite_sticky_over(
        &query,
        &grounded.rules,
        &grounded.database,
        DEFAULT_MAX_DISJUNCTS,
    )?;
    let answers = evaluate_ucq(&rewriting, &grounded.database);
    Ok(HybridRun {
        reduced,
        query,
        grounded,
        rewriting,
        answers,
    })
}

pub fn hybrid_answer(
    program: &Program,
    query: &ConjunctiveQuery,
) -> Result<BTreeSet<Vec<Term>>, RewriteError> {
    Ok(hybrid_pipeline(program, query)?.answers)
}
