//! Character cursor with the term-level productions shared by the N-Triples and Turtle readers.

use super::term::{is_forbidden_iri_char, is_pn_chars, is_pn_chars_u};
use super::RdfError;

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str, line: usize) -> Self {
        Self {
            src,
            pos: 0,
            line,
            col: 1,
        }
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn is_eof(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek_second(&self) -> Option<char> {
        let mut it = self.rest().chars();
        it.next();
        it.next()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    /// Consumes `s` if the input starts with it. `s` must not contain newlines.
    pub fn eat(&mut self, s: &str) -> bool {
        if self.starts_with(s) {
            self.pos += s.len();
            self.col += s.chars().count();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), RdfError> {
        match self.peek() {
            Some(found) if found == c => {
                self.bump();
                Ok(())
            }
            Some(found) => Err(self.error(format!("expected '{c}', found '{found}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn col(&self) -> usize {
        self.col
    }

    pub fn error(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: self.line,
            column: self.col,
            message: message.into(),
        }
    }

    pub fn unsupported(&self, construct: &str) -> RdfError {
        RdfError::Unsupported {
            line: self.line,
            column: self.col,
            construct: construct.to_string(),
        }
    }

    /// Skips spaces and tabs only.
    pub fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.bump();
        }
    }

    /// Skips all whitespace and `#` comments.
    pub fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(' ' | '\t' | '\n' | '\r') => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// `<...>` with UCHAR escapes resolved. Returns the raw IRI text.
    pub fn iriref(&mut self) -> Result<String, RdfError> {
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(self.error("invalid escape in IRI")),
                    };
                    if is_forbidden_iri_char(c) {
                        return Err(
                            self.error(format!("escaped character {c:?} not allowed in IRI"))
                        );
                    }
                    out.push(c);
                }
                Some(c) if is_forbidden_iri_char(c) => {
                    return Err(self.error(format!("character {c:?} not allowed in IRI")))
                }
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, RdfError> {
        let mut value = 0u32;
        for _ in 0..digits {
            let d = self
                .bump()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.error("invalid hex digit in escape"))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.error(format!("invalid code point U+{value:X}")))
    }

    /// `_:label`. A trailing '.' is left for the statement terminator.
    pub fn blank_label(&mut self) -> Result<String, RdfError> {
        if !self.eat("_:") {
            return Err(self.error("expected blank node"));
        }
        let start = self.pos;
        match self.peek() {
            Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
                self.bump();
            }
            _ => return Err(self.error("invalid blank node label")),
        }
        while let Some(c) = self.peek() {
            if is_pn_chars(c) || c == '.' {
                self.bump();
            } else {
                break;
            }
        }
        let mut label = &self.src[start..self.pos];
        while label.ends_with('.') {
            label = &label[..label.len() - 1];
            self.pos -= 1;
            self.col -= 1;
        }
        Ok(label.to_string())
    }

    /// A quoted string starting at the current quote character. Handles the
    /// long `"""`/`'''` forms when `allow_long` is set.
    pub fn quoted_string(&mut self, allow_long: bool) -> Result<String, RdfError> {
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.error("expected string literal")),
        };
        let triple: String = std::iter::repeat_n(quote, 3).collect();
        let long = allow_long && self.starts_with(&triple);
        if long {
            self.eat(&triple);
        } else {
            self.bump();
        }
        let mut out = String::new();
        loop {
            if long && self.starts_with(&triple) {
                // Up to two quotes may directly precede the closing delimiter.
                let extra = self.rest().chars().take_while(|&c| c == quote).count() - 3;
                for _ in 0..extra.min(2) {
                    out.push(quote);
                    self.bump();
                }
                self.eat(&triple);
                break;
            }
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some(c) if !long && c == quote => break,
                Some('\n' | '\r') if !long => {
                    return Err(self.error("line break in short string literal"))
                }
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(self.error("invalid escape sequence in literal")),
                    };
                    out.push(c);
                }
                Some(c) => out.push(c),
            }
        }
        Ok(out)
    }

    /// Language tag after '@' (the '@' must already be consumed).
    pub fn lang_tag(&mut self) -> Result<String, RdfError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                self.bump();
            } else {
                break;
            }
        }
        let tag = &self.src[start..self.pos];
        if !super::term::is_valid_lang_tag(tag) {
            return Err(self.error(format!("invalid language tag {tag:?}")));
        }
        Ok(tag.to_string())
    }
}
