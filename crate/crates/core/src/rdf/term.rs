//! RDF terms and triples in canonical form.

use std::fmt::{self, Write as _};

use super::RdfError;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

/// Annotation carried by a literal besides its lexical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Simple,
    Lang(String),
    Typed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    kind: LiteralKind,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            kind: LiteralKind::Simple,
        }
    }

    /// Language tags are stored lower-cased, which is the canonical N-Triples form.
    pub fn lang(lexical: impl Into<String>, tag: &str) -> Result<Self, RdfError> {
        if !is_valid_lang_tag(tag) {
            return Err(RdfError::invalid(format!("invalid language tag {tag:?}")));
        }
        Ok(Self {
            lexical: lexical.into(),
            kind: LiteralKind::Lang(tag.to_ascii_lowercase()),
        })
    }

    /// `xsd:string` collapses to a simple literal; `rdf:langString` needs a tag and is rejected here.
    pub fn typed(
        lexical: impl Into<String>,
        datatype: impl Into<String>,
    ) -> Result<Self, RdfError> {
        let datatype = datatype.into();
        check_iri(&datatype)?;
        let kind = match datatype.as_str() {
            XSD_STRING => LiteralKind::Simple,
            RDF_LANG_STRING => {
                return Err(RdfError::invalid(
                    "rdf:langString literal without a language tag",
                ))
            }
            _ => LiteralKind::Typed(datatype),
        };
        Ok(Self {
            lexical: lexical.into(),
            kind,
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn kind(&self) -> &LiteralKind {
        &self.kind
    }
}

/// An RDF term. Blank nodes are treated as stable labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Result<Self, RdfError> {
        let iri = iri.into();
        check_iri(&iri)?;
        Ok(Term::Iri(iri))
    }

    pub fn blank(label: impl Into<String>) -> Result<Self, RdfError> {
        let label = label.into();
        if !is_valid_blank_label(&label) {
            return Err(RdfError::invalid(format!(
                "invalid blank node label {label:?}"
            )));
        }
        Ok(Term::BlankNode(label))
    }

    pub fn literal(lit: Literal) -> Self {
        Term::Literal(lit)
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// Appends the N-Triples rendering of this term.
    pub fn write_canonical(&self, out: &mut String) {
        match self {
            Term::Iri(iri) => {
                out.push('<');
                out.push_str(iri);
                out.push('>');
            }
            Term::BlankNode(label) => {
                out.push_str("_:");
                out.push_str(label);
            }
            Term::Literal(lit) => {
                out.push('"');
                escape_literal(&lit.lexical, out);
                out.push('"');
                match &lit.kind {
                    LiteralKind::Simple => {}
                    LiteralKind::Lang(tag) => {
                        out.push('@');
                        out.push_str(tag);
                    }
                    LiteralKind::Typed(dt) => {
                        out.push_str("^^<");
                        out.push_str(dt);
                        out.push('>');
                    }
                }
            }
        }
    }

    pub fn canonical(&self) -> String {
        let mut s = String::new();
        self.write_canonical(&mut s);
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// One RDF statement. Constructed only through [`Triple::new`], which enforces
/// that the subject is an IRI or blank node and the predicate an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: String,
    object: Term,
}

impl Triple {
    pub fn new(
        subject: Term,
        predicate: impl Into<String>,
        object: Term,
    ) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::invalid("literal in subject position"));
        }
        let predicate = predicate.into();
        check_iri(&predicate)?;
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    /// Convenience constructor for all-IRI triples.
    pub fn iris(s: &str, p: &str, o: &str) -> Result<Self, RdfError> {
        Self::new(Term::iri(s)?, p, Term::iri(o)?)
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    /// Replaces the object, keeping subject and predicate.
    pub fn with_object(&self, object: Term) -> Self {
        Self {
            subject: self.subject.clone(),
            predicate: self.predicate.clone(),
            object,
        }
    }

    pub fn write_canonical(&self, out: &mut String) {
        self.subject.write_canonical(out);
        out.push_str(" <");
        out.push_str(&self.predicate);
        out.push_str("> ");
        self.object.write_canonical(out);
        out.push_str(" .");
    }
}

/// The canonical N-Triples statement for `t`, terminated by `" ."` and without a newline.
pub fn canonical_line(t: &Triple) -> String {
    let mut s = String::with_capacity(128);
    t.write_canonical(&mut s);
    s
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical_line(self))
    }
}

fn escape_literal(lexical: &str, out: &mut String) {
    for c in lexical.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// Characters that may not appear unescaped inside an IRIREF.
pub(crate) fn is_forbidden_iri_char(c: char) -> bool {
    matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') || (c as u32) <= 0x20
}

/// Absolute IRI check: a scheme followed by ':' and no forbidden characters.
pub(crate) fn check_iri(iri: &str) -> Result<(), RdfError> {
    if iri.is_empty() {
        return Err(RdfError::invalid("empty IRI"));
    }
    if let Some(c) = iri.chars().find(|&c| is_forbidden_iri_char(c)) {
        return Err(RdfError::invalid(format!(
            "character {c:?} not allowed in IRI {iri:?}"
        )));
    }
    let scheme_ok = match iri.find(':') {
        Some(idx) if idx > 0 => {
            let scheme = &iri[..idx];
            scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        }
        _ => false,
    };
    if !scheme_ok {
        return Err(RdfError::invalid(format!("relative IRI {iri:?}")));
    }
    Ok(())
}

pub(crate) fn is_valid_lang_tag(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let first = parts.next().unwrap_or("");
    if first.is_empty() || !first.chars().all(|c| c.is_ascii_alphabetic()) {
        return false;
    }
    parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

fn is_pn_chars_base(c: char) -> bool {
    c.is_ascii_alphabetic()
        || matches!(c as u32,
            0xC0..=0xD6 | 0xD8..=0xF6 | 0xF8..=0x2FF | 0x370..=0x37D | 0x37F..=0x1FFF
            | 0x200C..=0x200D | 0x2070..=0x218F | 0x2C00..=0x2FEF | 0x3001..=0xD7FF
            | 0xF900..=0xFDCF | 0xFDF0..=0xFFFD | 0x10000..=0xEFFFF)
}

pub(crate) fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

pub(crate) fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || matches!(c as u32, 0xB7 | 0x300..=0x36F | 0x203F..=0x2040)
}

pub(crate) fn is_valid_blank_label(label: &str) -> bool {
    let mut chars = label.chars();
    match chars.next() {
        Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {}
        _ => return false,
    }
    !label.ends_with('.') && chars.all(|c| is_pn_chars(c) || c == '.')
}
