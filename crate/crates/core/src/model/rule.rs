use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use super::atom::{Atom, Position};
use super::term::Term;
use super::ModelError;

/// A tuple-generating dependency with a single head atom. Ground rules
/// (no variables, nulls allowed) use the same type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub body: Vec<Atom>,
    pub head: Atom,
    pub existential_vars: BTreeSet<Arc<str>>,
}

impl Rule {
    /// Checks the rule invariants: existential variables occur in the head
    /// and never in the body, and every other head variable is bound by the
    /// body.
    pub fn new(
        body: Vec<Atom>,
        head: Atom,
        existential_vars: BTreeSet<Arc<str>>,
    ) -> Result<Self, ModelError> {
        let body_vars: BTreeSet<&Arc<str>> = body.iter().flat_map(Atom::variables).collect();
        for z in &existential_vars {
            if body_vars.contains(z) {
                return Err(ModelError::ExistentialInBody(z.to_string()));
            }
            if !head.variables().any(|v| v == z) {
                return Err(ModelError::UnusedExistential(z.to_string()));
            }
        }
        for v in head.variables() {
            if !body_vars.contains(v) && !existential_vars.contains(v) {
                return Err(ModelError::UnsafeHeadVariable(v.to_string()));
            }
        }
        Ok(Rule {
            body,
            head,
            existential_vars,
        })
    }

    /// A rule whose existential variables are exactly the head variables
    /// missing from the body.
    pub fn with_inferred_existentials(body: Vec<Atom>, head: Atom) -> Self {
        let body_vars: BTreeSet<&Arc<str>> = body.iter().flat_map(Atom::variables).collect();
        let existential_vars = head
            .variables()
            .filter(|v| !body_vars.contains(v))
            .cloned()
            .collect();
        Rule {
            body,
            head,
            existential_vars,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(Atom::is_ground)
    }

    pub fn is_existential(&self, var: &str) -> bool {
        self.existential_vars.contains(var)
    }

    /// Distinct body variables in order of first occurrence.
    pub fn body_variables(&self) -> Vec<Arc<str>> {
        let mut seen = Vec::new();
        for v in self.body.iter().flat_map(Atom::variables) {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        }
        seen
    }

    /// Body variables that also occur in the head, in order of first head
    /// occurrence.
    pub fn frontier(&self) -> Vec<Arc<str>> {
        let body_vars = self.body_variables();
        let mut out = Vec::new();
        for v in self.head.variables() {
            if body_vars.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Body positions at which `var` occurs.
    pub fn body_positions_of(&self, var: &str) -> Vec<Position> {
        self.body
            .iter()
            .flat_map(|a| a.slots())
            .filter(|(_, t)| t.var_name() == Some(var))
            .map(|(p, _)| p)
            .collect()
    }

    pub fn head_positions_of(&self, var: &str) -> Vec<Position> {
        self.head
            .slots()
            .filter(|(_, t)| t.var_name() == Some(var))
            .map(|(p, _)| p)
            .collect()
    }

    /// Number of occurrences of `var` in the body.
    pub fn body_occurrences(&self, var: &str) -> usize {
        self.body
            .iter()
            .flat_map(|a| a.args.iter())
            .filter(|t| t.var_name() == Some(var))
            .count()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.body.iter().chain(std::iter::once(&self.head))
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> + '_ {
        self.atoms().flat_map(|a| a.args.iter())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(" -> ")?;
        if !self.existential_vars.is_empty() {
            f.write_str("exists ")?;
            for (i, v) in self.existential_vars.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(v)?;
            }
            f.write_str(": ")?;
        }
        write!(f, "{}.", self.head)
    }
}

/// A conjunctive query `q(t1,...,tn) :- body`. User queries have only
/// variables in the answer tuple; rewritings may bind answer positions to
/// constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConjunctiveQuery {
    pub head_predicate: Arc<str>,
    pub answer: Vec<Term>,
    pub body: Vec<Atom>,
}

impl ConjunctiveQuery {
    pub fn new(
        head_predicate: impl Into<Arc<str>>,
        answer: Vec<Term>,
        body: Vec<Atom>,
    ) -> Result<Self, ModelError> {
        let q = ConjunctiveQuery {
            head_predicate: head_predicate.into(),
            answer,
            body,
        };
        for v in q.answer.iter().filter_map(Term::var_name) {
            if !q.body.iter().any(|a| a.variables().any(|w| &**w == v)) {
                return Err(ModelError::AnswerVariableNotInBody(v.to_string()));
            }
        }
        Ok(q)
    }

    pub fn is_boolean(&self) -> bool {
        self.answer.is_empty()
    }

    /// Distinct variables of the body in order of first occurrence.
    pub fn variables(&self) -> Vec<Arc<str>> {
        let mut seen = Vec::new();
        for v in self.body.iter().flat_map(Atom::variables) {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        }
        seen
    }

    pub fn answer_variables(&self) -> impl Iterator<Item = &Arc<str>> + '_ {
        self.answer.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v),
            _ => None,
        })
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.head_predicate)?;
        for (i, t) in self.answer.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(") :- ")?;
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

/// A rule set together with an extensional database over one schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub database: BTreeSet<Atom>,
}

impl Program {
    /// Builds a program, checking that facts hold only source constants and
    /// that every predicate keeps one arity throughout.
    pub fn new(rules: Vec<Rule>, database: BTreeSet<Atom>) -> Result<Self, ModelError> {
        for fact in &database {
            if let Some(t) = fact.args.iter().find(|t| !t.is_constant()) {
                return Err(ModelError::NonConstantFact {
                    fact: fact.to_string(),
                    term: t.to_string(),
                });
            }
        }
        let p = Program { rules, database };
        p.schema()?;
        Ok(p)
    }

    /// Predicates in order of first appearance: rules (body, then head),
    /// then facts.
    pub fn schema(&self) -> Result<Schema, ModelError> {
        let mut schema = Schema::default();
        for rule in &self.rules {
            for a in rule.atoms() {
                schema.add(a)?;
            }
        }
        for fact in &self.database {
            schema.add(fact)?;
        }
        Ok(schema)
    }

    /// Schema of the program extended with the predicates of `query`.
    pub fn schema_with_query(&self, query: &ConjunctiveQuery) -> Result<Schema, ModelError> {
        let mut schema = self.schema()?;
        for a in &query.body {
            schema.add(a)?;
        }
        Ok(schema)
    }

    /// Constants occurring in the database.
    pub fn active_domain(&self) -> BTreeSet<Term> {
        super::active_domain(&self.database)
    }

    /// Predicates that appear as the head of some rule.
    pub fn intensional_predicates(&self) -> BTreeSet<Arc<str>> {
        self.rules
            .iter()
            .map(|r| r.head.predicate.clone())
            .collect()
    }
}

/// An ordered predicate/arity table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    order: Vec<(Arc<str>, usize)>,
    index: HashMap<Arc<str>, usize>,
}

impl Schema {
    pub fn add(&mut self, atom: &Atom) -> Result<(), ModelError> {
        self.declare(&atom.predicate, atom.arity())
    }

    pub fn declare(&mut self, predicate: &Arc<str>, arity: usize) -> Result<(), ModelError> {
        match self.index.get(predicate) {
            Some(&i) if self.order[i].1 != arity => Err(ModelError::ArityMismatch {
                predicate: predicate.to_string(),
                expected: self.order[i].1,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.index.insert(predicate.clone(), self.order.len());
                self.order.push((predicate.clone(), arity));
                Ok(())
            }
        }
    }

    pub fn arity(&self, predicate: &str) -> Option<usize> {
        self.index.get(predicate).map(|&i| self.order[i].1)
    }

    pub fn contains(&self, predicate: &str) -> bool {
        self.index.contains_key(predicate)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&Arc<str>, usize)> + '_ {
        self.order.iter().map(|(p, a)| (p, *a))
    }

    /// All positions, grouped by predicate in schema order.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.order
            .iter()
            .flat_map(|(p, a)| (0..*a).map(move |i| Position::new(p.clone(), i)))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
