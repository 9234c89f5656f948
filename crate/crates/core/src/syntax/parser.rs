use std::collections::BTreeSet;
use std::sync::Arc;

use super::lexer::{tokenize, Spanned, Tok};
use super::{Document, ParseError};
use crate::model::{Atom, ConjunctiveQuery, Program, Rule, Schema, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Dialect {
    /// User source: generated lexemes and expanded predicate names rejected.
    Strict,
    /// Engine output: everything the serializer can produce.
    Generated,
}

pub(super) struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    dialect: Dialect,
    schema: Schema,
}

/// Whether `name` ends in `_x<digits>`, the suffix reserved for expanded
/// predicates.
pub(crate) fn has_expansion_suffix(name: &str) -> bool {
    match name.rfind("_x") {
        Some(i) => {
            let digits = &name[i + 2..];
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

impl Parser {
    pub fn new(text: &str, dialect: Dialect) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
            dialect,
            schema: Schema::default(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.at];
        (t.line, t.column)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    pub fn document(mut self) -> Result<Document, ParseError> {
        let mut rules = Vec::new();
        let mut rule_lines = Vec::new();
        let mut facts = BTreeSet::new();
        let mut queries = Vec::new();
        while *self.peek() != Tok::Eof {
            let (line, _) = self.here();
            let first = self.atom()?;
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    if let Some(t) = first.args.iter().find(|t| !t.is_constant()) {
                        return Err(ParseError::Syntax {
                            line,
                            column: 1,
                            message: format!("fact {first} contains non-constant term {t}"),
                        });
                    }
                    facts.insert(first);
                }
                Tok::Turnstile => {
                    self.bump();
                    queries.push(self.query_rest(first, line)?);
                }
                Tok::Comma | Tok::Arrow => {
                    rules.push(self.rule_rest(first, line)?);
                    rule_lines.push(line);
                }
                other => {
                    let found = describe(other);
                    return self.error(format!("expected '.', ',', '->' or ':-', found {found}"));
                }
            }
        }
        let program =
            Program::new(rules, facts).map_err(|e| ParseError::Invalid { line: 0, source: e })?;
        Ok(Document {
            program,
            queries,
            rule_lines,
        })
    }

    fn rule_rest(&mut self, first: Atom, line: usize) -> Result<Rule, ParseError> {
        let mut body = vec![first];
        while *self.peek() == Tok::Comma {
            self.bump();
            body.push(self.atom()?);
        }
        self.expect(Tok::Arrow, "'->'")?;
        let mut existential = BTreeSet::new();
        if matches!(self.peek(), Tok::Ident(w) if w == "exists")
            && matches!(self.peek_at(1), Tok::Var(_))
        {
            self.bump();
            loop {
                match self.bump() {
                    Tok::Var(v) => {
                        existential.insert(Arc::<str>::from(v));
                    }
                    other => {
                        self.at -= 1;
                        return self
                            .error(format!("expected variable, found {}", describe(&other)));
                    }
                }
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::Colon => {
                        self.bump();
                        break;
                    }
                    other => {
                        let found = describe(other);
                        return self.error(format!("expected ',' or ':', found {found}"));
                    }
                }
            }
        }
        let head = self.atom()?;
        if *self.peek() == Tok::Comma {
            return self.error("rule heads must be a single atom");
        }
        self.expect(Tok::Dot, "'.'")?;
        Rule::new(body, head, existential).map_err(|source| ParseError::Invalid { line, source })
    }

    fn query_rest(&mut self, head: Atom, line: usize) -> Result<ConjunctiveQuery, ParseError> {
        let mut body = vec![self.atom()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            body.push(self.atom()?);
        }
        self.expect(Tok::Dot, "'.'")?;
        if self.dialect == Dialect::Strict {
            if let Some(t) = head.args.iter().find(|t| !t.is_variable()) {
                return Err(ParseError::Syntax {
                    line,
                    column: 1,
                    message: format!("query answer term {t} is not a variable"),
                });
            }
        }
        ConjunctiveQuery::new(head.predicate, head.args, body)
            .map_err(|source| ParseError::Invalid { line, source })
    }

    /// Parses `pred(t1,...,tn)`. Query heads are parsed through here too but
    /// kept out of the schema by the caller's choice of what to register.
    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (line, _) = self.here();
        let predicate = match self.bump() {
            Tok::Ident(p) if p.starts_with(|c: char| c.is_ascii_lowercase()) => p,
            other => {
                self.at -= 1;
                return self.error(format!("expected predicate, found {}", describe(&other)));
            }
        };
        if self.dialect == Dialect::Strict && has_expansion_suffix(&predicate) {
            self.at -= 1;
            return self.error(format!(
                "predicate name {predicate} uses the reserved _x suffix"
            ));
        }
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.term()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        let atom = Atom::new(predicate, args);
        // a query head is followed by ':-' and does not belong to the schema
        if *self.peek() != Tok::Turnstile {
            self.schema
                .add(&atom)
                .map_err(|source| ParseError::Invalid { line, source })?;
        }
        Ok(atom)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let generated = self.dialect == Dialect::Generated;
        let t = match self.peek().clone() {
            Tok::Ident(c) | Tok::Str(c) => Term::constant(c),
            Tok::Var(v) => Term::var(v),
            Tok::Null(id) if generated => Term::LabeledNull(id),
            Tok::Frozen(id) if generated => Term::FrozenNull(id),
            Tok::Function(id) if generated => Term::FunctionConstant(id),
            Tok::Filler if generated => Term::Filler,
            ref other @ (Tok::Null(_) | Tok::Frozen(_) | Tok::Function(_) | Tok::Filler) => {
                return self.error(format!(
                    "reserved lexeme {} in source text",
                    describe(other)
                ));
            }
            other => return self.error(format!("expected term, found {}", describe(&other))),
        };
        self.bump();
        Ok(t)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Var(s) => format!("variable {s}"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Null(id) => format!("_n{id}"),
        Tok::Frozen(id) => format!("_f{id}"),
        Tok::Function(id) => format!("#f{id}"),
        Tok::Filler => "#_".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Colon => "':'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::Turnstile => "':-'".into(),
        Tok::Eof => "end of input".into(),
    }
}
