//! Reader for a Turtle subset: `@prefix`/`PREFIX` directives, prefixed names,
//! the `a` keyword, `;` and `,` abbreviations, and string, numeric, boolean,
//! typed and language-tagged literals.
//!
//! Blank-node property lists, collections and base IRIs are rejected with
//! [`RdfError::Unsupported`].

use std::collections::HashMap;

use super::lex::Cursor;
use super::term::{
    is_pn_chars, is_pn_chars_u, Literal, Term, Triple, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL,
    XSD_DOUBLE, XSD_INTEGER,
};
use super::RdfError;

pub fn parse_turtle(text: &str) -> Result<Vec<Triple>, RdfError> {
    TurtleParser {
        cur: Cursor::new(text, 1),
        prefixes: HashMap::new(),
        out: Vec::new(),
    }
    .run()
}

pub fn parse_turtle_bytes(bytes: &[u8]) -> Result<Vec<Triple>, RdfError> {
    let text = std::str::from_utf8(bytes).map_err(RdfError::from_utf8)?;
    parse_turtle(text)
}

struct TurtleParser<'a> {
    cur: Cursor<'a>,
    prefixes: HashMap<String, String>,
    out: Vec<Triple>,
}

impl<'a> TurtleParser<'a> {
    fn run(mut self) -> Result<Vec<Triple>, RdfError> {
        loop {
            self.cur.skip_ws_and_comments();
            if self.cur.is_eof() {
                break;
            }
            if self.cur.starts_with("@prefix") {
                self.cur.eat("@prefix");
                self.prefix_body()?;
                self.cur.skip_ws_and_comments();
                self.cur.expect('.')?;
            } else if self.keyword_ahead("PREFIX") {
                self.prefix_body()?;
            } else if self.cur.starts_with("@base") || self.keyword_ahead("BASE") {
                return Err(self.cur.unsupported("base IRI directive"));
            } else {
                self.triples()?;
                self.cur.skip_ws_and_comments();
                self.cur.expect('.')?;
            }
        }
        Ok(self.out)
    }

    /// Case-insensitive SPARQL-style keyword followed by whitespace; consumes it on match.
    fn keyword_ahead(&mut self, kw: &str) -> bool {
        let rest = self.cur.rest();
        let matches = rest.len() > kw.len()
            && rest[..kw.len()].eq_ignore_ascii_case(kw)
            && rest[kw.len()..].starts_with(|c: char| c.is_whitespace());
        if matches {
            for _ in 0..kw.len() {
                self.cur.bump();
            }
        }
        matches
    }

    fn prefix_body(&mut self) -> Result<(), RdfError> {
        self.cur.skip_ws_and_comments();
        let name = self.pn_prefix()?;
        self.cur.expect(':')?;
        self.cur.skip_ws_and_comments();
        let (line, col) = (self.cur.line(), self.cur.col());
        let iri = self.cur.iriref()?;
        super::term::check_iri(&iri).map_err(|e| e.at(line, col))?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn pn_prefix(&mut self) -> Result<String, RdfError> {
        let mut name = String::new();
        if let Some(c) = self.cur.peek() {
            if is_pn_chars_u(c) && c != '_' {
                while let Some(c) = self.cur.peek() {
                    if is_pn_chars(c) || c == '.' {
                        name.push(c);
                        self.cur.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        if name.ends_with('.') {
            return Err(self.cur.error("prefix name may not end with '.'"));
        }
        Ok(name)
    }

    fn triples(&mut self) -> Result<(), RdfError> {
        let subject = match self.cur.peek() {
            Some('[') => return Err(self.cur.unsupported("blank node property list")),
            Some('(') => return Err(self.cur.unsupported("collection")),
            Some('_') if self.cur.peek_second() == Some(':') => {
                Term::BlankNode(self.cur.blank_label()?)
            }
            Some('"' | '\'') => return Err(self.cur.error("literal in subject position")),
            _ => self.iri_term()?,
        };
        self.cur.skip_ws_and_comments();
        self.predicate_object_list(&subject)
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), RdfError> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.cur.skip_ws_and_comments();
            if self.cur.peek() != Some(';') {
                return Ok(());
            }
            while self.cur.peek() == Some(';') {
                self.cur.bump();
                self.cur.skip_ws_and_comments();
            }
            if matches!(self.cur.peek(), Some('.' | ']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<String, RdfError> {
        if self.cur.peek() == Some('a')
            && self
                .cur
                .peek_second()
                .is_none_or(|c| c.is_whitespace() || matches!(c, '<' | '"' | '\'' | '_' | '['))
        {
            self.cur.bump();
            self.cur.skip_ws_and_comments();
            return Ok(RDF_TYPE.to_string());
        }
        let (line, col) = (self.cur.line(), self.cur.col());
        match self.iri_term()? {
            Term::Iri(iri) => {
                self.cur.skip_ws_and_comments();
                Ok(iri)
            }
            _ => Err(RdfError::Syntax {
                line,
                column: col,
                message: "expected IRI as predicate".into(),
            }),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &str) -> Result<(), RdfError> {
        loop {
            let (line, col) = (self.cur.line(), self.cur.col());
            let object = self.object()?;
            let triple =
                Triple::new(subject.clone(), predicate, object).map_err(|e| e.at(line, col))?;
            self.out.push(triple);
            self.cur.skip_ws_and_comments();
            if self.cur.peek() == Some(',') {
                self.cur.bump();
                self.cur.skip_ws_and_comments();
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, RdfError> {
        match self.cur.peek() {
            Some('[') => Err(self.cur.unsupported("blank node property list")),
            Some('(') => Err(self.cur.unsupported("collection")),
            Some('_') if self.cur.peek_second() == Some(':') => {
                Ok(Term::BlankNode(self.cur.blank_label()?))
            }
            Some('"' | '\'') => self.string_literal(),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => self.numeric_literal(),
            Some(_) if self.boolean_ahead("true") => Ok(Term::Literal(
                Literal::typed("true", XSD_BOOLEAN).expect("xsd:boolean is absolute"),
            )),
            Some(_) if self.boolean_ahead("false") => Ok(Term::Literal(
                Literal::typed("false", XSD_BOOLEAN).expect("xsd:boolean is absolute"),
            )),
            Some(_) => self.iri_term(),
            None => Err(self.cur.error("expected object, found end of input")),
        }
    }

    fn boolean_ahead(&mut self, word: &str) -> bool {
        let rest = self.cur.rest();
        let hit = rest.starts_with(word)
            && !rest[word.len()..].starts_with(|c: char| is_pn_chars(c) || c == ':');
        if hit {
            self.cur.eat(word);
        }
        hit
    }

    fn string_literal(&mut self) -> Result<Term, RdfError> {
        let (line, col) = (self.cur.line(), self.cur.col());
        let lexical = self.cur.quoted_string(true)?;
        let lit = if self.cur.eat("@") {
            let tag = self.cur.lang_tag()?;
            Literal::lang(lexical, &tag)
        } else if self.cur.eat("^^") {
            match self.iri_term()? {
                Term::Iri(dt) => Literal::typed(lexical, dt),
                _ => return Err(self.cur.error("datatype must be an IRI")),
            }
        } else {
            Ok(Literal::simple(lexical))
        };
        lit.map(Term::Literal).map_err(|e| e.at(line, col))
    }

    fn numeric_literal(&mut self) -> Result<Term, RdfError> {
        let rest = self.cur.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if matches!(bytes.first(), Some(b'+' | b'-')) {
            i += 1;
        }
        let int_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let int_digits = i - int_start;
        let mut frac_digits = 0;
        if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
                frac_digits += 1;
            }
        }
        if int_digits == 0 && frac_digits == 0 {
            return Err(self.cur.error("invalid numeric literal"));
        }
        let mut datatype = if frac_digits > 0 {
            XSD_DECIMAL
        } else {
            XSD_INTEGER
        };
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
                j += 1;
            }
            let exp_start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j == exp_start {
                return Err(self.cur.error("invalid exponent in numeric literal"));
            }
            i = j;
            datatype = XSD_DOUBLE;
        }
        let lexical = rest[..i].to_string();
        for _ in 0..i {
            self.cur.bump();
        }
        Ok(Term::Literal(
            Literal::typed(lexical, datatype).expect("xsd datatypes are absolute"),
        ))
    }

    /// IRIREF or prefixed name, expanded to an absolute IRI.
    fn iri_term(&mut self) -> Result<Term, RdfError> {
        let (line, col) = (self.cur.line(), self.cur.col());
        let iri = if self.cur.peek() == Some('<') {
            self.cur.iriref()?
        } else {
            let prefix = self.pn_prefix()?;
            if self.cur.peek() != Some(':') {
                return Err(RdfError::Syntax {
                    line,
                    column: col,
                    message: "expected IRI or prefixed name".into(),
                });
            }
            self.cur.bump();
            let local = self.pn_local()?;
            let ns = self.prefixes.get(&prefix).ok_or_else(|| RdfError::Syntax {
                line,
                column: col,
                message: format!("undeclared prefix {prefix:?}"),
            })?;
            format!("{ns}{local}")
        };
        Term::iri(iri).map_err(|e| e.at(line, col))
    }

    fn pn_local(&mut self) -> Result<String, RdfError> {
        let mut out = String::new();
        let mut first = true;
        while let Some(c) = self.cur.peek() {
            let ok_here = if first {
                is_pn_chars_u(c) || c.is_ascii_digit() || c == ':' || c == '%' || c == '\\'
            } else {
                is_pn_chars(c) || c == '.' || c == ':' || c == '%' || c == '\\'
            };
            if !ok_here {
                break;
            }
            if c == '.' {
                // Only part of the name if followed by another name character.
                let next = self.cur.peek_second();
                let continues =
                    next.is_some_and(|n| is_pn_chars(n) || matches!(n, '.' | ':' | '%' | '\\'));
                if !continues {
                    break;
                }
            }
            first = false;
            match c {
                '%' => {
                    self.cur.bump();
                    out.push('%');
                    for _ in 0..2 {
                        match self.cur.bump() {
                            Some(h) if h.is_ascii_hexdigit() => out.push(h),
                            _ => {
                                return Err(self.cur.error("invalid percent escape in local name"))
                            }
                        }
                    }
                }
                '\\' => {
                    self.cur.bump();
                    match self.cur.bump() {
                        Some(e) if "_~.-!$&'()*+,;=/?#@%".contains(e) => out.push(e),
                        _ => return Err(self.cur.error("invalid escape in local name")),
                    }
                }
                c => {
                    self.cur.bump();
                    out.push(c);
                }
            }
        }
        if out.ends_with('.') {
            return Err(self.cur.error("local name may not end with '.'"));
        }
        Ok(out)
    }
}
