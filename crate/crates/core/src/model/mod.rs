//! Terms, atoms, rules, queries and homomorphisms.

mod atom;
mod homomorphism;
mod rule;
mod subst;
mod term;

pub use atom::{atom, Atom, Position};
pub(crate) use homomorphism::pi_homomorphic_ground;
pub use homomorphism::{
    active_domain, find_homomorphisms, find_homomorphisms_from, for_each_match, has_homomorphism,
    match_atom, pi_homomorphic, Instance,
};
pub use rule::{ConjunctiveQuery, Program, Rule, Schema};
pub use subst::Substitution;
pub use term::{Fresh, Term};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("predicate {predicate} used with arity {found}, expected {expected}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("head variable {0} does not occur in the body and is not existential")]
    UnsafeHeadVariable(String),
    #[error("existential variable {0} occurs in the body")]
    ExistentialInBody(String),
    #[error("existential variable {0} does not occur in the head")]
    UnusedExistential(String),
    #[error("fact {fact} contains non-constant term {term}")]
    NonConstantFact { fact: String, term: String },
    #[error("answer variable {0} does not occur in the query body")]
    AnswerVariableNotInBody(String),
    #[error("atom {0} is not ground")]
    NotGround(String),
}
