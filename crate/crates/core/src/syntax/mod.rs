//! Text format for programs, facts and queries, plus CSV fact loading.
//!
//! Lowercase identifiers, integers and double-quoted strings are constants
//! (and lowercase identifiers name predicates); uppercase identifiers are
//! variables and may carry trailing primes. `%` starts a line comment.
//!
//! ```text
//! emp(joe).
//! emp(X) -> exists Y: rep(X,Y).
//! q(W1) :- rep(W1,W2).
//! ```

mod csv_facts;
mod lexer;
mod parser;

use std::fmt::Write;

use thiserror::Error;

use crate::model::{ConjunctiveQuery, ModelError, Program};
pub use csv_facts::{load_csv, read_csv, CsvBinding, CsvError};
pub(crate) use parser::has_expansion_suffix;
use parser::{Dialect, Parser};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: ModelError },
}

/// A parsed `.dl` file: rules and facts plus any queries it declares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub program: Program,
    pub queries: Vec<ConjunctiveQuery>,
    /// Source line of each rule, by rule index.
    pub rule_lines: Vec<usize>,
}

/// Parses user-written source. Generated lexemes (`_n1`, `_f1`, `#f1`, `#_`)
/// and predicate names ending in `_x<n>` are rejected.
pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    Parser::new(text, Dialect::Strict)?.document()
}

/// Parses engine output: ground programs, transformed programs and
/// rewritings, with every generated lexeme allowed.
pub fn parse_generated(text: &str) -> Result<Document, ParseError> {
    Parser::new(text, Dialect::Generated)?.document()
}

/// Parses a program, rejecting any query statements.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let doc = parse_document(text)?;
    reject_queries(&doc)?;
    Ok(doc.program)
}

/// Parses a text holding exactly one query and nothing else.
pub fn parse_query(text: &str) -> Result<ConjunctiveQuery, ParseError> {
    parse_single_query(parse_document(text)?)
}

/// Like [`parse_query`] but over the generated dialect.
pub fn parse_generated_query(text: &str) -> Result<ConjunctiveQuery, ParseError> {
    parse_single_query(parse_generated(text)?)
}

fn reject_queries(doc: &Document) -> Result<(), ParseError> {
    if doc.queries.is_empty() {
        return Ok(());
    }
    Err(ParseError::Syntax {
        line: 1,
        column: 1,
        message: "unexpected query in program text".into(),
    })
}

fn parse_single_query(mut doc: Document) -> Result<ConjunctiveQuery, ParseError> {
    if !doc.program.rules.is_empty() || !doc.program.database.is_empty() || doc.queries.len() != 1 {
        return Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: format!("expected exactly one query, found {}", doc.queries.len()),
        });
    }
    Ok(doc.queries.remove(0))
}

/// Canonical text: facts in sorted order, then rules in program order, one
/// statement per line.
pub fn serialize_program(program: &Program) -> String {
    let mut out = String::new();
    for fact in &program.database {
        let _ = writeln!(out, "{fact}.");
    }
    for rule in &program.rules {
        let _ = writeln!(out, "{rule}");
    }
    out
}

pub fn serialize_query(query: &ConjunctiveQuery) -> String {
    format!("{query}\n")
}

/// A program followed by queries.
pub fn serialize_document(program: &Program, queries: &[ConjunctiveQuery]) -> String {
    let mut out = serialize_program(program);
    for q in queries {
        out.push_str(&serialize_query(q));
    }
    out
}
