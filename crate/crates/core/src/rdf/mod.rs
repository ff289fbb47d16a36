//! RDF data model: terms, triples, graphs, readers and version diffs.

mod diff;
mod graph;
mod lex;
mod ntriples;
mod term;
mod turtle;

use std::path::Path;

pub use diff::{apply_diff, diff, KGDiff};
pub use graph::KnowledgeGraph;
pub use ntriples::{parse_ntriples, parse_ntriples_bytes, parse_ntriples_line};
pub use term::{canonical_line, Literal, LiteralKind, Term, Triple};
pub use term::{RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, XSD_STRING};
pub use turtle::{parse_turtle, parse_turtle_bytes};

#[derive(Debug, thiserror::Error)]
pub enum RdfError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported Turtle construct at line {line}, column {column}: {construct}")]
    Unsupported {
        line: usize,
        column: usize,
        construct: String,
    },
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("input is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("{message}: {triple}")]
    Precondition { message: String, triple: String },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<RdfError>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl RdfError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RdfError::InvalidTerm(msg.into())
    }

    pub(crate) fn from_utf8(e: std::str::Utf8Error) -> Self {
        RdfError::Encoding {
            offset: e.valid_up_to(),
        }
    }

    /// Attaches a source position to a term-validation error.
    pub(crate) fn at(self, line: usize, column: usize) -> Self {
        match self {
            RdfError::InvalidTerm(message) => RdfError::Syntax {
                line,
                column,
                message,
            },
            other => other,
        }
    }
}

/// Reads a `.nt` or `.ttl` file into a graph. Any other extension is read as N-Triples.
pub fn read_graph_file(path: &Path) -> Result<KnowledgeGraph, RdfError> {
    let bytes = std::fs::read(path).map_err(|source| RdfError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let is_turtle = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("ttl"));
    let parsed = if is_turtle {
        parse_turtle_bytes(&bytes)
    } else {
        parse_ntriples_bytes(&bytes)
    };
    parsed
        .map(|ts| ts.into_iter().collect())
        .map_err(|e| RdfError::File {
            path: path.display().to_string(),
            source: Box::new(e),
        })
}
