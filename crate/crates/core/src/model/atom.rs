use std::fmt;
use std::sync::Arc;

use super::term::Term;

/// An argument slot `p[i]` of a predicate. `index` is zero-based; the
/// textual form is one-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub predicate: Arc<str>,
    pub index: usize,
}

impl Position {
    pub fn new(predicate: impl Into<Arc<str>>, index: usize) -> Self {
        Position {
            predicate: predicate.into(),
            index,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.predicate, self.index + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<Arc<str>>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn position(&self, index: usize) -> Position {
        Position::new(self.predicate.clone(), index)
    }

    /// `(position, term)` pairs in argument order.
    pub fn slots(&self) -> impl Iterator<Item = (Position, &Term)> + '_ {
        self.args
            .iter()
            .enumerate()
            .map(move |(i, t)| (self.position(i), t))
    }

    pub fn variables(&self) -> impl Iterator<Item = &Arc<str>> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v),
            _ => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_variable())
    }

    pub fn contains(&self, term: &Term) -> bool {
        self.args.contains(term)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// Builds an atom from a compact textual spec, for tests and examples:
/// uppercase-initial strings become variables, everything else constants.
pub fn atom(predicate: &str, args: &[&str]) -> Atom {
    Atom::new(
        predicate,
        args.iter()
            .map(|a| {
                if a.starts_with(|c: char| c.is_ascii_uppercase()) {
                    Term::var(*a)
                } else {
                    Term::constant(*a)
                }
            })
            .collect(),
    )
}
