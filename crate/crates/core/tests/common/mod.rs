//! Generators and reference models shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use kgdlt::rdf::{canonical_line, KnowledgeGraph, Literal, Term, Triple};
use kgdlt::strategies::TripleOp;
use proptest::prelude::*;
use rand::Rng;

/// Set-of-lines model of a graph under a stream of ops.
#[derive(Debug, Default, Clone)]
pub struct SetOracle {
    pub lines: BTreeSet<String>,
}

impl SetOracle {
    pub fn apply(&mut self, op: &TripleOp) {
        match op {
            TripleOp::Insert(t) => {
                self.lines.insert(canonical_line(t));
            }
            TripleOp::Delete(t) => {
                self.lines.remove(&canonical_line(t));
            }
            TripleOp::Update { old, new } => {
                self.lines.remove(&canonical_line(old));
                self.lines.insert(canonical_line(new));
            }
        }
    }

    pub fn matches(&self, g: &KnowledgeGraph) -> bool {
        let lines: BTreeSet<String> = g.iter().map(canonical_line).collect();
        lines == self.lines
    }
}

pub fn vocab_iri(i: usize) -> String {
    format!("http://example.org/v/{i}")
}

pub fn vocab_triple(s: usize, p: usize, o: usize, vocab: usize) -> Triple {
    Triple::iris(
        &vocab_iri(s % vocab),
        &vocab_iri(p % vocab),
        &vocab_iri(o % vocab),
    )
    .unwrap()
}

/// A sequence of ops over a `vocab`-IRI vocabulary in which every update
/// targets a triple that is present when the update runs. Duplicate inserts
/// and deletes of absent triples are allowed.
pub fn random_ops<R: Rng>(rng: &mut R, vocab: usize, len: usize) -> Vec<TripleOp> {
    let mut present: Vec<Triple> = Vec::new();
    let mut ops = Vec::with_capacity(len);
    let pick = |rng: &mut R| {
        vocab_triple(
            rng.gen_range(0..vocab),
            rng.gen_range(0..vocab),
            rng.gen_range(0..vocab),
            vocab,
        )
    };
    for _ in 0..len {
        let roll = rng.gen_range(0..10);
        let op = if roll < 5 || present.is_empty() {
            let t = pick(rng);
            if !present.contains(&t) {
                present.push(t.clone());
            }
            TripleOp::Insert(t)
        } else if roll < 8 {
            let t = if rng.gen_bool(0.8) {
                present.swap_remove(rng.gen_range(0..present.len()))
            } else {
                let t = pick(rng);
                present.retain(|x| x != &t);
                t
            };
            TripleOp::Delete(t)
        } else {
            let i = rng.gen_range(0..present.len());
            let old = present[i].clone();
            let new = loop {
                let candidate =
                    old.with_object(Term::iri(vocab_iri(rng.gen_range(0..vocab))).unwrap());
                if candidate == old || !present.contains(&candidate) {
                    break candidate;
                }
            };
            present[i] = new.clone();
            TripleOp::Update { old, new }
        };
        ops.push(op);
    }
    ops
}

fn iri_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}".prop_map(|s| format!("http://example.org/{s}")),
        "[a-zA-Z0-9_%#/.-]{0,12}".prop_map(|s| format!("urn:x:{s}")),
        "[α-ω]{1,4}".prop_map(|s| format!("http://例え.jp/{s}")),
    ]
}

fn literal_strategy() -> impl Strategy<Value = Literal> {
    let lexical = prop_oneof![
        "[ -~]{0,20}",
        "\\PC{0,10}",
        Just("line\nbreak\t\"quoted\"\\".to_string()),
        Just("\u{1}\u{7f}\r".to_string()),
    ];
    (lexical, 0..4u8, "[a-z]{2}(-[A-Z0-9]{2,4})?", iri_strategy()).prop_map(|(lex, k, tag, dt)| {
        match k {
            0 => Literal::simple(lex),
            1 => Literal::lang(lex, &tag).unwrap(),
            _ => Literal::typed(lex, dt).unwrap(),
        }
    })
}

pub fn term_strategy() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => iri_strategy().prop_map(|i| Term::iri(i).unwrap()),
        1 => "[a-z][a-z0-9]{0,6}".prop_map(|b| Term::blank(b).unwrap()),
        3 => literal_strategy().prop_map(Term::literal),
    ]
}

pub fn triple_strategy() -> impl Strategy<Value = Triple> {
    let subject = prop_oneof![
        3 => iri_strategy().prop_map(|i| Term::iri(i).unwrap()),
        1 => "[a-z][a-z0-9]{0,6}".prop_map(|b| Term::blank(b).unwrap()),
    ];
    (subject, iri_strategy(), term_strategy()).prop_map(|(s, p, o)| Triple::new(s, p, o).unwrap())
}

pub fn op_strategy() -> impl Strategy<Value = TripleOp> {
    prop_oneof![
        triple_strategy().prop_map(TripleOp::Insert),
        triple_strategy().prop_map(TripleOp::Delete),
        (triple_strategy(), triple_strategy()).prop_map(|(old, new)| TripleOp::Update { old, new }),
    ]
}

pub fn graph_strategy(max: usize) -> impl Strategy<Value = KnowledgeGraph> {
    prop::collection::vec(triple_strategy(), 0..max).prop_map(|v| v.into_iter().collect())
}

/// Graph over a small vocabulary so that subject/predicate keys collide.
pub fn small_graph_strategy(vocab: usize, max: usize) -> impl Strategy<Value = KnowledgeGraph> {
    prop::collection::vec((0..vocab, 0..4usize, 0..vocab), 0..max).prop_map(move |v| {
        v.into_iter()
            .map(|(s, p, o)| vocab_triple(s, p, o, vocab))
            .collect()
    })
}
