//! N-Triples reader.

use super::lex::Cursor;
use super::term::{Literal, Term, Triple};
use super::RdfError;

/// Parses an N-Triples document. Triples come back in document order and
/// duplicates are preserved.
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, RdfError> {
    let mut out = Vec::new();
    for (idx, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if let Some(t) = parse_statement(line, idx + 1)? {
            out.push(t);
        }
    }
    Ok(out)
}

/// Same as [`parse_ntriples`] but validates UTF-8 first.
pub fn parse_ntriples_bytes(bytes: &[u8]) -> Result<Vec<Triple>, RdfError> {
    let text = std::str::from_utf8(bytes).map_err(RdfError::from_utf8)?;
    parse_ntriples(text)
}

/// Parses exactly one statement (no blank line, no comment-only line).
pub fn parse_ntriples_line(line: &str) -> Result<Triple, RdfError> {
    parse_statement(line, 1)?.ok_or_else(|| RdfError::Syntax {
        line: 1,
        column: 1,
        message: "expected a statement".into(),
    })
}

fn parse_statement(line: &str, line_no: usize) -> Result<Option<Triple>, RdfError> {
    let mut cur = Cursor::new(line, line_no);
    cur.skip_inline_ws();
    if cur.is_eof() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => iri_term(&mut cur)?,
        Some('_') => blank_term(&mut cur)?,
        _ => return Err(cur.error("expected IRI or blank node as subject")),
    };
    cur.skip_inline_ws();
    if cur.peek() != Some('<') {
        return Err(cur.error("expected IRI as predicate"));
    }
    let (line_at, col_at) = (cur.line(), cur.col());
    let predicate = cur.iriref()?;
    cur.skip_inline_ws();
    let object = match cur.peek() {
        Some('<') => iri_term(&mut cur)?,
        Some('_') => blank_term(&mut cur)?,
        Some('"') => literal_term(&mut cur)?,
        _ => return Err(cur.error("expected IRI, blank node or literal as object")),
    };
    cur.skip_inline_ws();
    cur.expect('.')?;
    cur.skip_inline_ws();
    if !cur.is_eof() && cur.peek() != Some('#') {
        return Err(cur.error("unexpected content after statement terminator"));
    }
    Triple::new(subject, predicate, object)
        .map(Some)
        .map_err(|e| e.at(line_at, col_at))
}

fn iri_term(cur: &mut Cursor<'_>) -> Result<Term, RdfError> {
    let (line, col) = (cur.line(), cur.col());
    let iri = cur.iriref()?;
    Term::iri(iri).map_err(|e| e.at(line, col))
}

fn blank_term(cur: &mut Cursor<'_>) -> Result<Term, RdfError> {
    let label = cur.blank_label()?;
    Ok(Term::BlankNode(label))
}

fn literal_term(cur: &mut Cursor<'_>) -> Result<Term, RdfError> {
    let (line, col) = (cur.line(), cur.col());
    let lexical = cur.quoted_string(false)?;
    let lit = if cur.eat("@") {
        let tag = cur.lang_tag()?;
        Literal::lang(lexical, &tag)
    } else if cur.eat("^^") {
        let dt = cur.iriref()?;
        Literal::typed(lexical, dt)
    } else {
        Ok(Literal::simple(lexical))
    };
    lit.map(Term::Literal).map_err(|e| e.at(line, col))
}
