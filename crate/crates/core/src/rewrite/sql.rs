use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::sync::Arc;

use super::{RewriteError, UCQRewriting};
use crate::model::{ConjunctiveQuery, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqlTable {
    pub name: String,
    pub columns: Vec<String>,
}

/// Table and column names for each predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SqlSchema {
    tables: BTreeMap<Arc<str>, SqlTable>,
}

impl SqlSchema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Predicates mapped to same-named tables with columns `c1..cn`.
    pub fn with_predicates<'a>(preds: impl IntoIterator<Item = (&'a Arc<str>, usize)>) -> Self {
        let mut s = Self::new();
        for (p, arity) in preds {
            s.add_default(p.clone(), arity);
        }
        s
    }

    pub fn add_default(&mut self, predicate: Arc<str>, arity: usize) {
        let table = SqlTable {
            name: predicate.to_string(),
            columns: (1..=arity).map(|i| format!("c{i}")).collect(),
        };
        self.tables.insert(predicate, table);
    }

    pub fn insert(&mut self, predicate: Arc<str>, table: SqlTable) {
        self.tables.insert(predicate, table);
    }

    pub fn table(&self, predicate: &str) -> Option<&SqlTable> {
        self.tables.get(predicate)
    }

    pub fn contains(&self, predicate: &str) -> bool {
        self.tables.contains_key(predicate)
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

fn aliases(query: &ConjunctiveQuery) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for (i, t) in query.answer.iter().enumerate() {
        let base = match t {
            Term::Variable(v) => v.to_lowercase().replace('\'', "_"),
            _ => format!("a{}", i + 1),
        };
        let mut name = base.clone();
        let mut k = 1;
        while out.contains(&name) {
            k += 1;
            name = format!("{base}_{k}");
        }
        out.push(name);
    }
    out
}

/// One `SELECT` per disjunct, combined with `UNION`.
///
/// Disjuncts mentioning engine-generated terms cannot match a database of
/// source constants and are left out. With no disjunct left the statement
/// selects nothing.
pub fn emit_sql(ucq: &UCQRewriting, schema: &SqlSchema) -> Result<String, RewriteError> {
    let names = aliases(&ucq.query);
    let mut selects = Vec::new();
    for d in &ucq.disjuncts {
        let generated = d
            .body
            .iter()
            .flat_map(|a| a.args.iter())
            .chain(&d.answer)
            .any(|t| !t.is_variable() && !t.is_constant());
        if generated {
            continue;
        }
        selects.push(select(d, &names, schema)?);
    }
    if selects.is_empty() {
        let cols = if names.is_empty() {
            "1 AS holds".to_string()
        } else {
            names
                .iter()
                .map(|n| format!("NULL AS {n}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Ok(format!("SELECT {cols} WHERE 1 = 0"));
    }
    Ok(selects.join(" UNION "))
}

fn select(
    d: &ConjunctiveQuery,
    names: &[String],
    schema: &SqlSchema,
) -> Result<String, RewriteError> {
    let mut from = Vec::new();
    let mut first: BTreeMap<&str, String> = BTreeMap::new();
    let mut conds = Vec::new();
    for (k, a) in d.body.iter().enumerate() {
        let table = schema
            .table(&a.predicate)
            .filter(|t| t.columns.len() == a.arity())
            .ok_or_else(|| RewriteError::UnknownPredicate(a.predicate.to_string()))?;
        from.push(format!("{} AS t{k}", table.name));
        for (t, col) in a.args.iter().zip(&table.columns) {
            let here = format!("t{k}.{col}");
            match t {
                Term::Variable(v) => match first.get(&**v) {
                    Some(prev) => conds.push(format!("{prev} = {here}")),
                    None => {
                        first.insert(v, here);
                    }
                },
                Term::Constant(c) => conds.push(format!("{here} = {}", quote(c))),
                _ => unreachable!("generated terms are filtered out"),
            }
        }
    }
    let mut cols = Vec::new();
    for (t, name) in d.answer.iter().zip(names) {
        let expr = match t {
            Term::Variable(v) => first[&**v].clone(),
            Term::Constant(c) => quote(c),
            _ => unreachable!("generated terms are filtered out"),
        };
        cols.push(format!("{expr} AS {name}"));
    }
    if cols.is_empty() {
        cols.push("1 AS holds".into());
    }
    let mut out = String::new();
    let _ = write!(out, "SELECT {} FROM {}", cols.join(", "), from.join(", "));
    if !conds.is_empty() {
        let _ = write!(out, " WHERE {}", conds.join(" AND "));
    }
    Ok(out)
}

/// Predicates the UCQ mentions that `schema` lacks.
pub fn missing_predicates(ucq: &UCQRewriting, schema: &SqlSchema) -> BTreeSet<Arc<str>> {
    ucq.disjuncts
        .iter()
        .flat_map(|d| d.body.iter())
        .filter(|a| !schema.contains(&a.predicate))
        .map(|a| a.predicate.clone())
        .collect()
}
