use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Atom, Term};

/// Facts for one predicate stored as comma-separated rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvBinding {
    pub predicate: String,
    pub arity: usize,
    pub path: PathBuf,
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: row {row}: expected {expected} fields, found {found}")]
    Arity {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: row {row}: {message}")]
    Format {
        path: String,
        row: usize,
        message: String,
    },
}

pub fn load_csv(binding: &CsvBinding) -> Result<BTreeSet<Atom>, CsvError> {
    let path = binding.path.display().to_string();
    let file = File::open(&binding.path).map_err(|source| CsvError::Io {
        path: path.clone(),
        source,
    })?;
    read_csv(&binding.predicate, binding.arity, file, &path)
}

/// Reads rows from `reader`; `label` names the source in error messages.
pub fn read_csv(
    predicate: &str,
    arity: usize,
    reader: impl Read,
    label: &str,
) -> Result<BTreeSet<Atom>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = BTreeSet::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CsvError::Io {
                path: label.to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => CsvError::Format {
                path: label.to_string(),
                row,
                message: e.to_string(),
            },
        })?;
        if record.len() != arity {
            return Err(CsvError::Arity {
                path: label.to_string(),
                row,
                expected: arity,
                found: record.len(),
            });
        }
        if let Some(empty) = record.iter().position(str::is_empty) {
            return Err(CsvError::Format {
                path: label.to_string(),
                row,
                message: format!("field {} is empty", empty + 1),
            });
        }
        out.insert(Atom::new(
            predicate,
            record.iter().map(Term::constant).collect(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::atom;

    #[test]
    fn single_row() {
        let facts = read_csv("p", 2, "a,b\n".as_bytes(), "t").unwrap();
        assert_eq!(
            facts.into_iter().collect::<Vec<_>>(),
            vec![atom("p", &["a", "b"])]
        );
    }

    #[test]
    fn duplicates_collapse() {
        let facts = read_csv("p", 2, "a,b\na,b\n".as_bytes(), "t").unwrap();
        assert_eq!(facts.len(), 1);
    }

    #[test]
    fn short_row() {
        let err = read_csv("p", 2, "a\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(
            err,
            CsvError::Arity {
                row: 1,
                expected: 2,
                found: 1,
                ..
            }
        ));
        let err = read_csv("p", 2, "a,b\nc,d,e\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, CsvError::Arity { row: 2, .. }));
    }

    #[test]
    fn quoted_fields() {
        let facts = read_csv("p", 1, "\"x, y\"\n".as_bytes(), "t").unwrap();
        assert!(facts.contains(&Atom::new("p", vec![Term::constant("x, y")])));
    }

    #[test]
    fn missing_file() {
        let b = CsvBinding {
            predicate: "p".into(),
            arity: 1,
            path: "/nonexistent/facts.csv".into(),
        };
        assert!(matches!(load_csv(&b), Err(CsvError::Io { .. })));
    }
}
