//! Query-driven grounding of weakly-sticky programs, evaluation of ground
//! programs, and a bounded restricted chase used as a reference.

mod ground;
mod oracle;

pub use ground::{ground_ws, resumptions_for, GroundProgram, GroundingConfig};
pub use oracle::{certain_answers_oracle, oracle_chase, run_oracle_chase, ChaseRun};

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use thiserror::Error;

use crate::model::{
    for_each_match, Atom, ConjunctiveQuery, Instance, ModelError, Substitution, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChaseError {
    #[error("program is not weakly sticky")]
    NotWeaklySticky,
    #[error("grounding exceeded the cap of {0} rules")]
    RuleCapExceeded(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Least model of a ground program: the database closed under its rules.
pub fn minimal_model(gp: &GroundProgram) -> Instance {
    let mut inst: Instance = gp.database.iter().cloned().collect();
    // each rule waits on its missing body atoms
    let mut missing: Vec<usize> = Vec::with_capacity(gp.ground_rules.len());
    let mut waiting: HashMap<&Atom, Vec<usize>> = HashMap::new();
    let mut ready = Vec::new();
    for (i, rule) in gp.ground_rules.iter().enumerate() {
        let distinct: BTreeSet<&Atom> = rule.body.iter().collect();
        let mut n = 0;
        for a in distinct {
            if !inst.contains(a) {
                waiting.entry(a).or_default().push(i);
                n += 1;
            }
        }
        missing.push(n);
        if n == 0 {
            ready.push(i);
        }
    }
    while let Some(i) = ready.pop() {
        let head = &gp.ground_rules[i].head;
        if inst.insert(head.clone()).1 {
            for &j in waiting.get(head).into_iter().flatten() {
                missing[j] -= 1;
                if missing[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    inst
}

/// Answers of `query` over `instance`, keeping only tuples of source
/// constants. A Boolean query yields the empty tuple when it holds.
pub fn answers(query: &ConjunctiveQuery, instance: &Instance) -> BTreeSet<Vec<Term>> {
    let mut out = BTreeSet::new();
    let _ = for_each_match(
        &query.body,
        instance,
        &Substitution::new(),
        &mut |_, _| true,
        &mut |h, _| {
            let tuple: Vec<Term> = query.answer.iter().map(|t| h.apply_term(t)).collect();
            if tuple.iter().all(Term::is_constant) {
                out.insert(tuple);
            }
            ControlFlow::Continue(())
        },
    );
    out
}

pub fn answer_over_ground(query: &ConjunctiveQuery, gp: &GroundProgram) -> BTreeSet<Vec<Term>> {
    answers(query, &minimal_model(gp))
}
