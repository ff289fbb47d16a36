use std::collections::hash_set;
use std::collections::HashSet;

use super::term::{canonical_line, Triple};

/// A set of triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    triples: HashSet<Triple>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            triples: HashSet::with_capacity(n),
        }
    }

    /// Returns `false` when the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        self.triples.insert(t)
    }

    /// Returns `false` when the triple was absent.
    pub fn remove(&mut self, t: &Triple) -> bool {
        self.triples.remove(t)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> hash_set::Iter<'_, Triple> {
        self.triples.iter()
    }

    /// Triples ordered by their canonical line, the order used for every
    /// deterministic output of this crate.
    pub fn sorted(&self) -> Vec<&Triple> {
        let mut v: Vec<&Triple> = self.triples.iter().collect();
        v.sort_by_cached_key(|t| canonical_line(t));
        v
    }

    pub fn sorted_lines(&self) -> Vec<String> {
        let mut v: Vec<String> = self.triples.iter().map(canonical_line).collect();
        v.sort_unstable();
        v
    }
}

impl FromIterator<Triple> for KnowledgeGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Self {
            triples: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for KnowledgeGraph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter)
    }
}

impl IntoIterator for KnowledgeGraph {
    type Item = Triple;
    type IntoIter = hash_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a KnowledgeGraph {
    type Item = &'a Triple;
    type IntoIter = hash_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}
