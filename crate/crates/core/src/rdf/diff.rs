//! Version diff between two knowledge graphs.
//!
//! A `(subject, predicate)` key that carries exactly one object in each graph,
//! with differing objects, is classified as an update. Every other changed
//! triple is an addition or a deletion.

use std::collections::HashMap;

use super::graph::KnowledgeGraph;
use super::term::{canonical_line, Term, Triple};
use super::RdfError;

/// Changes turning one graph into another. Each list is sorted by canonical
/// line (updates by the old side) so consumers stream them deterministically.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KGDiff {
    pub added: Vec<Triple>,
    pub updated: Vec<(Triple, Triple)>,
    pub deleted: Vec<Triple>,
}

impl KGDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.updated.is_empty() && self.deleted.is_empty()
    }

    /// Total number of operations the diff expands to.
    pub fn op_count(&self) -> usize {
        self.added.len() + self.updated.len() + self.deleted.len()
    }
}

type Key<'a> = (&'a Term, &'a str);

fn key_counts(g: &KnowledgeGraph) -> HashMap<Key<'_>, usize> {
    let mut counts = HashMap::with_capacity(g.len());
    for t in g {
        *counts.entry((t.subject(), t.predicate())).or_insert(0) += 1;
    }
    counts
}

pub fn diff(old: &KnowledgeGraph, new: &KnowledgeGraph) -> KGDiff {
    let old_counts = key_counts(old);
    let new_counts = key_counts(new);
    let single = |k: &Key<'_>| old_counts.get(k) == Some(&1) && new_counts.get(k) == Some(&1);

    // On a single-object key, the one new-side triple is necessarily absent from old.
    let mut new_only_single: HashMap<Key<'_>, &Triple> = HashMap::new();
    let mut added = Vec::new();
    for t in new.iter().filter(|t| !old.contains(t)) {
        let k = (t.subject(), t.predicate());
        if single(&k) {
            new_only_single.insert(k, t);
        } else {
            added.push(t.clone());
        }
    }

    let mut updated = Vec::new();
    let mut deleted = Vec::new();
    for t in old.iter().filter(|t| !new.contains(t)) {
        let k = (t.subject(), t.predicate());
        match new_only_single.remove(&k) {
            Some(replacement) => updated.push((t.clone(), replacement.clone())),
            None => deleted.push(t.clone()),
        }
    }
    debug_assert!(new_only_single.is_empty());

    added.sort_by_cached_key(canonical_line);
    deleted.sort_by_cached_key(canonical_line);
    updated.sort_by_cached_key(|(o, _)| canonical_line(o));
    KGDiff {
        added,
        updated,
        deleted,
    }
}

/// Applies `d` to `g`, checking that everything removed is present and
/// nothing added already exists.
pub fn apply_diff(g: &KnowledgeGraph, d: &KGDiff) -> Result<KnowledgeGraph, RdfError> {
    let mut out = g.clone();
    for t in d.deleted.iter().chain(d.updated.iter().map(|(old, _)| old)) {
        if !out.remove(t) {
            return Err(RdfError::Precondition {
                message: "triple to remove is not in the graph".into(),
                triple: canonical_line(t),
            });
        }
    }
    for t in &d.added {
        if g.contains(t) {
            return Err(RdfError::Precondition {
                message: "triple to add is already in the graph".into(),
                triple: canonical_line(t),
            });
        }
    }
    out.extend(d.added.iter().cloned());
    out.extend(d.updated.iter().map(|(_, new)| new.clone()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::iris(
            &format!("http://{s}"),
            &format!("http://{p}"),
            &format!("http://{o}"),
        )
        .unwrap()
    }

    fn g(ts: &[Triple]) -> KnowledgeGraph {
        ts.iter().cloned().collect()
    }

    #[test]
    fn identical_graphs_have_empty_diff() {
        let a = g(&[t("s", "p", "o"), t("s", "q", "o")]);
        assert!(diff(&a, &a).is_empty());
    }

    #[test]
    fn single_object_change_is_an_update() {
        let d = diff(&g(&[t("s", "p", "a")]), &g(&[t("s", "p", "b")]));
        assert_eq!(d.updated, vec![(t("s", "p", "a"), t("s", "p", "b"))]);
        assert!(d.added.is_empty() && d.deleted.is_empty());
    }

    #[test]
    fn multi_valued_keys_fall_back_to_add_delete() {
        let old = g(&[t("s", "p", "a"), t("s", "p", "b")]);
        let new = g(&[t("s", "p", "a"), t("s", "p", "c")]);
        let d = diff(&old, &new);
        assert!(d.updated.is_empty());
        assert_eq!(d.added, vec![t("s", "p", "c")]);
        assert_eq!(d.deleted, vec![t("s", "p", "b")]);
        assert_eq!(apply_diff(&old, &d).unwrap(), new);
    }

    #[test]
    fn apply_identity_and_delete() {
        let one = g(&[t("s", "p", "o")]);
        assert_eq!(apply_diff(&one, &KGDiff::default()).unwrap(), one);
        let d = KGDiff {
            deleted: vec![t("s", "p", "o")],
            ..Default::default()
        };
        assert!(apply_diff(&one, &d).unwrap().is_empty());
    }

    #[test]
    fn apply_reports_offending_triple() {
        let one = g(&[t("s", "p", "o")]);
        let d = KGDiff {
            deleted: vec![t("x", "p", "o")],
            ..Default::default()
        };
        match apply_diff(&one, &d) {
            Err(RdfError::Precondition { triple, .. }) => {
                assert_eq!(triple, "<http://x> <http://p> <http://o> .")
            }
            other => panic!("unexpected {other:?}"),
        }
        let d = KGDiff {
            added: vec![t("s", "p", "o")],
            ..Default::default()
        };
        assert!(apply_diff(&one, &d).is_err());
    }
}
