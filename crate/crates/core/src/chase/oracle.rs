use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use super::answers;
use crate::model::{
    for_each_match, has_homomorphism, match_atom, Atom, ConjunctiveQuery, Fresh, Instance, Program,
    Substitution, Term,
};

/// Result of a bounded restricted chase.
#[derive(Clone, Debug)]
pub struct ChaseRun {
    pub instance: Instance,
    /// No trigger is active on the final instance.
    pub saturated: bool,
}

/// Breadth-first restricted chase: in round k every trigger with a body atom
/// from round k-1 fires, in sorted order, unless its head already maps into
/// the current instance. Rounds stop after `max_depth`.
pub fn run_oracle_chase(program: &Program, max_depth: usize) -> ChaseRun {
    let mut inst: Instance = program.database.iter().cloned().collect();
    let mut levels = vec![0usize; inst.len()];
    let mut nulls = Fresh::default();
    let mut depth = 1;
    loop {
        let triggers = triggers_at(program, &inst, &levels, depth - 1);
        if depth > max_depth {
            let active = triggers.iter().any(|((ri, _), h)| {
                !has_homomorphism(&[program.rules[*ri].head.clone()], &inst, h)
            });
            return ChaseRun {
                instance: inst,
                saturated: !active,
            };
        }
        let mut added = false;
        for ((ri, _), h) in triggers {
            let rule = &program.rules[ri];
            if has_homomorphism(std::slice::from_ref(&rule.head), &inst, &h) {
                continue;
            }
            let mut ext = h;
            for z in &rule.existential_vars {
                ext.bind(
                    Term::Variable(z.clone()),
                    Term::LabeledNull(nulls.next_id()),
                );
            }
            let (_, new) = inst.insert(ext.apply(&rule.head));
            if new {
                levels.push(depth);
                added = true;
            }
        }
        if !added {
            return ChaseRun {
                instance: inst,
                saturated: true,
            };
        }
        depth += 1;
    }
}

/// Triggers with at least one body atom at `level` and all at or below it.
fn triggers_at(
    program: &Program,
    inst: &Instance,
    levels: &[usize],
    level: usize,
) -> BTreeMap<(usize, Vec<Atom>), Substitution> {
    let mut delta_by_pred: HashMap<&str, Vec<usize>> = HashMap::new();
    for (id, l) in levels.iter().enumerate() {
        if *l == level {
            delta_by_pred
                .entry(&inst.get(id).predicate)
                .or_default()
                .push(id);
        }
    }
    let mut out = BTreeMap::new();
    for (ri, rule) in program.rules.iter().enumerate() {
        for (i, pivot) in rule.body.iter().enumerate() {
            let Some(ids) = delta_by_pred.get(&*pivot.predicate) else {
                continue;
            };
            let rest: Vec<Atom> = rule
                .body
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, a)| a.clone())
                .collect();
            let original: Vec<usize> = (0..rule.body.len()).filter(|&j| j != i).collect();
            for &id in ids {
                let mut init = Substitution::new();
                if !match_atom(pivot, inst.get(id), &mut init) {
                    continue;
                }
                let mut accept = |k: usize, other: usize| {
                    if original[k] < i {
                        levels[other] < level
                    } else {
                        levels[other] <= level
                    }
                };
                let _ = for_each_match(&rest, inst, &init, &mut accept, &mut |h, _| {
                    out.entry((ri, h.apply_all(&rule.body)))
                        .or_insert_with(|| h.clone());
                    ControlFlow::Continue(())
                });
            }
        }
    }
    out
}

pub fn oracle_chase(program: &Program, max_depth: usize) -> BTreeSet<Atom> {
    run_oracle_chase(program, max_depth)
        .instance
        .atoms()
        .iter()
        .cloned()
        .collect()
}

/// Constant-only answers of `query` over the bounded chase.
pub fn certain_answers_oracle(
    query: &ConjunctiveQuery,
    program: &Program,
    max_depth: usize,
) -> BTreeSet<Vec<Term>> {
    answers(query, &run_oracle_chase(program, max_depth).instance)
}
