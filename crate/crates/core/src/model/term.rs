use std::fmt;
use std::sync::Arc;

/// A term of the rule language.
///
/// The derived ordering is the canonical term ordering used for every
/// deterministic choice in the engine: constants by name, then labeled nulls,
/// frozen nulls and function constants by id, then the filler, then variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// A data constant from the source syntax or a CSV file.
    Constant(Arc<str>),
    /// A placeholder for an unknown value, remappable by homomorphisms.
    LabeledNull(u64),
    /// A labeled null promoted to constant status by a grounding resumption.
    FrozenNull(u64),
    /// A constant standing for a Skolem function symbol.
    FunctionConstant(u64),
    /// Padding for unused slots of an expanded position.
    Filler,
    Variable(Arc<str>),
}

impl Term {
    pub fn constant(name: impl Into<Arc<str>>) -> Self {
        Term::Constant(name.into())
    }

    pub fn var(name: impl Into<Arc<str>>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_labeled_null(&self) -> bool {
        matches!(self, Term::LabeledNull(_))
    }

    /// Ordinary source constants, the only terms allowed in answers and in the
    /// active domain.
    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Constant(_))
    }

    /// Terms generated by the engine that behave as constants but never show
    /// up in answers.
    pub fn is_special(&self) -> bool {
        matches!(
            self,
            Term::FrozenNull(_) | Term::FunctionConstant(_) | Term::Filler
        )
    }

    /// Terms that a homomorphism must map to themselves.
    pub fn is_rigid(&self) -> bool {
        self.is_constant() || self.is_special()
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            Term::Variable(name) => Some(name),
            _ => None,
        }
    }
}

fn is_plain_constant(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Writes a constant name, quoting it when it is not a bare lowercase
/// identifier.
pub(crate) fn write_constant(f: &mut impl fmt::Write, name: &str) -> fmt::Result {
    if is_plain_constant(name) {
        return f.write_str(name);
    }
    f.write_char('"')?;
    for c in name.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            _ => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(name) => write_constant(f, name),
            Term::Variable(name) => f.write_str(name),
            Term::LabeledNull(id) => write!(f, "_n{id}"),
            Term::FrozenNull(id) => write!(f, "_f{id}"),
            Term::FunctionConstant(id) => write!(f, "#f{id}"),
            Term::Filler => f.write_str("#_"),
        }
    }
}

/// Monotonic id source for generated terms.
#[derive(Clone, Debug)]
pub struct Fresh {
    next: u64,
}

impl Fresh {
    pub fn starting_at(next: u64) -> Self {
        Fresh { next: next.max(1) }
    }

    pub fn next_id(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }
}

impl Default for Fresh {
    fn default() -> Self {
        Fresh::starting_at(1)
    }
}
