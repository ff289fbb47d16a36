//! Triple-pattern lookup and N-Triples export over a reconstructed graph.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::rdf::{canonical_line, parse_ntriples_line, KnowledgeGraph, RdfError, Term, Triple};

/// A triple pattern. `None` is a wildcard.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<Term>,
    pub predicate: Option<String>,
    pub object: Option<Term>,
}

impl TriplePattern {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn matches(&self, t: &Triple) -> bool {
        self.subject.as_ref().is_none_or(|s| s == t.subject())
            && self.predicate.as_deref().is_none_or(|p| p == t.predicate())
            && self.object.as_ref().is_none_or(|o| o == t.object())
    }

    /// Parses three N-Triples terms separated by whitespace, `?` for a wildcard.
    /// An optional trailing `.` is accepted.
    pub fn parse(text: &str) -> Result<Self, RdfError> {
        // Reuse the N-Triples parser by substituting placeholders for wildcards.
        const PH_S: &str = "<urn:x-wildcard:s>";
        const PH_P: &str = "<urn:x-wildcard:p>";
        const PH_O: &str = "<urn:x-wildcard:o>";
        let mut rest = text.trim();
        rest = rest.strip_suffix('.').map(str::trim_end).unwrap_or(rest);
        let mut parts = Vec::new();
        for (i, placeholder) in [PH_S, PH_P].into_iter().enumerate() {
            let (term, tail) = split_term(rest).ok_or_else(|| {
                RdfError::invalid(format!("pattern needs three terms, found {i}"))
            })?;
            parts.push(if term == "?" {
                placeholder.to_string()
            } else {
                term.to_string()
            });
            rest = tail.trim_start();
        }
        if rest.is_empty() {
            return Err(RdfError::invalid("pattern needs three terms, found 2"));
        }
        parts.push(if rest == "?" {
            PH_O.to_string()
        } else {
            rest.to_string()
        });
        let t = parse_ntriples_line(&format!("{} {} {} .", parts[0], parts[1], parts[2]))?;
        let wild = |term: &Term, ph: &str| matches!(term, Term::Iri(i) if format!("<{i}>") == ph);
        Ok(Self {
            subject: (!wild(t.subject(), PH_S)).then(|| t.subject().clone()),
            predicate: (format!("<{}>", t.predicate()) != PH_P).then(|| t.predicate().to_string()),
            object: (!wild(t.object(), PH_O)).then(|| t.object().clone()),
        })
    }
}

/// Splits off the first subject or predicate token. These are IRIs, blank
/// nodes or `?`, none of which contain whitespace.
fn split_term(s: &str) -> Option<(&str, &str)> {
    let end = s.find(char::is_whitespace)?;
    Some((&s[..end], &s[end..]))
}

impl FromStr for TriplePattern {
    type Err = RdfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Some(s) => write!(f, "{}", s.canonical())?,
            None => f.write_str("?")?,
        }
        match &self.predicate {
            Some(p) => write!(f, " <{p}>")?,
            None => f.write_str(" ?")?,
        }
        match &self.object {
            Some(o) => write!(f, " {}", o.canonical()),
            None => f.write_str(" ?"),
        }
    }
}

/// Graph with subject, predicate and object indexes. Triples are held in
/// canonical-line order, so every result list comes out sorted.
#[derive(Debug, Clone, Default)]
pub struct IndexedGraph {
    triples: Vec<Triple>,
    by_subject: HashMap<Term, Vec<u32>>,
    by_predicate: HashMap<String, Vec<u32>>,
    by_object: HashMap<Term, Vec<u32>>,
}

impl IndexedGraph {
    pub fn new(g: &KnowledgeGraph) -> Self {
        let mut keyed: Vec<(String, &Triple)> = g.iter().map(|t| (canonical_line(t), t)).collect();
        keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let triples: Vec<Triple> = keyed.into_iter().map(|(_, t)| t.clone()).collect();
        let mut ix = Self {
            triples: Vec::new(),
            ..Default::default()
        };
        for (i, t) in triples.iter().enumerate() {
            let i = i as u32;
            ix.by_subject
                .entry(t.subject().clone())
                .or_default()
                .push(i);
            ix.by_predicate
                .entry(t.predicate().to_string())
                .or_default()
                .push(i);
            ix.by_object.entry(t.object().clone()).or_default().push(i);
        }
        ix.triples = triples;
        ix
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn match_pattern(&self, p: &TriplePattern) -> Vec<&Triple> {
        const EMPTY: &[u32] = &[];
        let mut postings: Vec<&[u32]> = Vec::with_capacity(3);
        if let Some(s) = &p.subject {
            postings.push(self.by_subject.get(s).map_or(EMPTY, Vec::as_slice));
        }
        if let Some(pr) = &p.predicate {
            postings.push(self.by_predicate.get(pr).map_or(EMPTY, Vec::as_slice));
        }
        if let Some(o) = &p.object {
            postings.push(self.by_object.get(o).map_or(EMPTY, Vec::as_slice));
        }
        match postings.iter().min_by_key(|l| l.len()) {
            None => self.triples.iter().collect(),
            Some(shortest) => shortest
                .iter()
                .map(|&i| &self.triples[i as usize])
                .filter(|t| p.matches(t))
                .collect(),
        }
    }
}

/// Triples of `g` matching `p`, in canonical-line order.
pub fn match_pattern(g: &KnowledgeGraph, p: &TriplePattern) -> Vec<Triple> {
    let mut hits: Vec<(String, &Triple)> = g
        .iter()
        .filter(|t| p.matches(t))
        .map(|t| (canonical_line(t), t))
        .collect();
    hits.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    hits.into_iter().map(|(_, t)| t.clone()).collect()
}

/// Sorted canonical N-Triples document.
pub fn export_ntriples(g: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for line in g.sorted_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_ntriples<W: Write>(g: &KnowledgeGraph, mut w: W) -> io::Result<()> {
    for line in g.sorted_lines() {
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_ntriples, Literal};

    fn graph() -> KnowledgeGraph {
        parse_ntriples(
            "<http://a> <http://p> <http://b> .\n\
             <http://a> <http://q> \"x\"@en .\n\
             <http://b> <http://p> <http://a> .\n\
             _:n <http://p> <http://b> .\n",
        )
        .unwrap()
        .into_iter()
        .collect()
    }

    #[test]
    fn wildcards_and_bound_terms() {
        let p: TriplePattern = "? <http://p> ?".parse().unwrap();
        assert_eq!(p.subject, None);
        assert_eq!(p.predicate.as_deref(), Some("http://p"));
        let p: TriplePattern = "<http://a> ? \"x\"@EN .".parse().unwrap();
        assert_eq!(
            p.object,
            Some(Term::literal(Literal::lang("x", "en").unwrap()))
        );
        assert!("<http://a> ?".parse::<TriplePattern>().is_err());
        assert!("? ? ? ?".parse::<TriplePattern>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["? ? ?", "<http://a> ? \"x y\"@en", "_:n <http://p> ?"] {
            let p: TriplePattern = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
    }

    #[test]
    fn index_agrees_with_scan() {
        let g = graph();
        let ix = IndexedGraph::new(&g);
        for s in [
            "? ? ?",
            "? <http://p> ?",
            "<http://a> ? ?",
            "? ? <http://b>",
            "<http://z> ? ?",
            "_:n <http://p> <http://b>",
        ] {
            let p: TriplePattern = s.parse().unwrap();
            let via_index: Vec<Triple> = ix.match_pattern(&p).into_iter().cloned().collect();
            assert_eq!(via_index, match_pattern(&g, &p), "{s}");
        }
        assert_eq!(ix.match_pattern(&TriplePattern::any()).len(), 4);
    }

    #[test]
    fn export_is_sorted_and_reparses() {
        let g = graph();
        let doc = export_ntriples(&g);
        let back: KnowledgeGraph = parse_ntriples(&doc).unwrap().into_iter().collect();
        assert_eq!(back, g);
        assert!(doc.starts_with("<http://a> <http://p> <http://b> .\n"));
        assert_eq!(export_ntriples(&KnowledgeGraph::new()), "");
        let mut buf = Vec::new();
        write_ntriples(&g, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), doc);
    }
}
