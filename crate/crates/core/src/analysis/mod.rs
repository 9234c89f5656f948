//! Sticky marking, the dependency graph, position ranks and class
//! membership tests.

mod graph;
mod marking;

pub use graph::{build_dependency_graph, compute_ranks, DependencyGraph, Rank, RankMap};
pub use marking::{mark_variables, Marking};

use std::sync::Arc;

use crate::model::{ConjunctiveQuery, ModelError, Program, Rule, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub sticky: bool,
    pub weakly_acyclic: bool,
    pub weakly_sticky: bool,
    /// No existential variable occurs at a finite-rank head position.
    pub zero_infinity: bool,
}

/// Everything the engine derives syntactically from a rule set.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub schema: Schema,
    pub marking: Marking,
    pub graph: DependencyGraph,
    pub ranks: RankMap,
    pub report: ClassReport,
}

impl Analysis {
    pub fn of_rules(rules: &[Rule]) -> Self {
        let mut schema = Schema::default();
        for a in rules.iter().flat_map(Rule::atoms) {
            let _ = schema.add(a);
        }
        Self::build(rules, schema)
    }

    /// Analysis over the full schema of the program and, when given, the
    /// query: positions only mentioned by facts or the query get rank 0.
    pub fn of_program(
        program: &Program,
        query: Option<&ConjunctiveQuery>,
    ) -> Result<Self, ModelError> {
        let schema = match query {
            Some(q) => program.schema_with_query(q)?,
            None => program.schema()?,
        };
        Ok(Self::build(&program.rules, schema))
    }

    fn build(rules: &[Rule], schema: Schema) -> Self {
        let marking = mark_variables(rules);
        let mut graph = build_dependency_graph(rules);
        graph.add_schema(&schema);
        let ranks = compute_ranks(&graph);
        let report = report(rules, &marking, &ranks);
        Analysis {
            schema,
            marking,
            graph,
            ranks,
            report,
        }
    }
}

pub fn classify(rules: &[Rule]) -> ClassReport {
    Analysis::of_rules(rules).report
}

/// Body variables of `rule` occurring more than once in its body, in order
/// of first occurrence.
pub fn repeated_body_variables(rule: &Rule) -> Vec<Arc<str>> {
    rule.body_variables()
        .into_iter()
        .filter(|v| rule.body_occurrences(v) > 1)
        .collect()
}

fn report(rules: &[Rule], marking: &Marking, ranks: &RankMap) -> ClassReport {
    let mut sticky = true;
    let mut weakly_sticky = true;
    for (i, rule) in rules.iter().enumerate() {
        for v in repeated_body_variables(rule) {
            if !marking.is_marked(i, &v) {
                continue;
            }
            sticky = false;
            if !rule
                .body_positions_of(&v)
                .iter()
                .any(|p| ranks.is_finite(p))
            {
                weakly_sticky = false;
            }
        }
    }
    let weakly_acyclic = ranks.iter().all(|(_, r)| r.is_finite());
    let zero_infinity = rules.iter().all(|rule| {
        rule.head
            .slots()
            .filter(|(_, t)| t.var_name().is_some_and(|v| rule.is_existential(v)))
            .all(|(p, _)| !ranks.is_finite(&p))
    });
    ClassReport {
        sticky,
        weakly_acyclic,
        weakly_sticky,
        zero_infinity,
    }
}
