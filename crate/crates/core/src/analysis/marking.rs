use std::collections::BTreeSet;
use std::sync::Arc;

use crate::model::{Position, Rule};

/// Marked `(rule index, variable)` pairs. A marked pair marks every body
/// occurrence of the variable in that rule.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Marking {
    pub marked: BTreeSet<(usize, Arc<str>)>,
}

impl Marking {
    pub fn is_marked(&self, rule: usize, var: &str) -> bool {
        self.marked.contains(&(rule, Arc::from(var)))
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }
}

/// Least fixpoint of the sticky marking procedure.
///
/// A body variable missing from the head is marked. Whenever a marked
/// variable sits at body position π, every rule whose head carries one of
/// its own body variables at π gets that variable marked too.
pub fn mark_variables(rules: &[Rule]) -> Marking {
    let mut marking = Marking::default();
    let mut work: Vec<(usize, Arc<str>)> = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        let head_vars: BTreeSet<&Arc<str>> = rule.head.variables().collect();
        for v in rule.body_variables() {
            if !head_vars.contains(&v) && marking.marked.insert((i, v.clone())) {
                work.push((i, v));
            }
        }
    }
    let mut marked_positions: BTreeSet<Position> = BTreeSet::new();
    while let Some((i, v)) = work.pop() {
        for pi in rules[i].body_positions_of(&v) {
            if !marked_positions.insert(pi.clone()) {
                continue;
            }
            for (j, other) in rules.iter().enumerate() {
                if other.head.predicate != pi.predicate || other.head.arity() <= pi.index {
                    continue;
                }
                let Some(w) = other.head.args[pi.index].var_name() else {
                    continue;
                };
                if other.is_existential(w) {
                    continue;
                }
                let key = (j, Arc::<str>::from(w));
                if marking.marked.insert(key.clone()) {
                    work.push(key);
                }
            }
        }
    }
    marking
}
