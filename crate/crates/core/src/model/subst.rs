use std::collections::BTreeMap;
use std::fmt;

use super::atom::Atom;
use super::rule::Rule;
use super::term::Term;

/// A finite mapping from variables and labeled nulls to terms. Rigid terms
/// (constants and the special constants) are never keys, so applying a
/// substitution is the identity on them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution {
    map: BTreeMap<Term, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    /// Binds `from` to `to`. Returns `false` and leaves the substitution
    /// untouched when `from` is rigid or already bound to another term.
    pub fn bind(&mut self, from: Term, to: Term) -> bool {
        if from.is_rigid() {
            return from == to;
        }
        match self.map.get(&from) {
            Some(existing) => existing == &to,
            None => {
                self.map.insert(from, to);
                true
            }
        }
    }

    pub fn get(&self, term: &Term) -> Option<&Term> {
        self.map.get(term)
    }

    pub fn get_var(&self, name: &str) -> Option<&Term> {
        self.map.get(&Term::var(name))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term)> + '_ {
        self.map.iter()
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        self.map.get(term).cloned().unwrap_or_else(|| term.clone())
    }

    pub fn apply(&self, atom: &Atom) -> Atom {
        Atom::new(
            atom.predicate.clone(),
            atom.args.iter().map(|t| self.apply_term(t)).collect(),
        )
    }

    pub fn apply_all(&self, atoms: &[Atom]) -> Vec<Atom> {
        atoms.iter().map(|a| self.apply(a)).collect()
    }

    /// Applies the substitution to body and head; existential markers are
    /// kept for variables that stay unmapped.
    pub fn apply_rule(&self, rule: &Rule) -> Rule {
        let body = self.apply_all(&rule.body);
        let head = self.apply(&rule.head);
        let existential_vars = rule
            .existential_vars
            .iter()
            .filter(|z| !self.map.contains_key(&Term::var((*z).clone())))
            .cloned()
            .collect();
        Rule {
            body,
            head,
            existential_vars,
        }
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Term, Term> = self
            .map
            .iter()
            .map(|(k, v)| (k.clone(), other.apply_term(v)))
            .collect();
        for (k, v) in &other.map {
            map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution { map }
    }

    /// Keeps only the bindings whose key satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Term) -> bool) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl FromIterator<(Term, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Term, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (k, v) in iter {
            s.bind(k, v);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        f.write_str("}")
    }
}
