//! Seeded synthetic knowledge graphs shaped like an upper ontology dump:
//! each concept carries a type, a super-class, labels and a definition, and
//! canonical line lengths follow a shifted exponential.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::rdf::{canonical_line, Literal, Term, Triple, RDF_TYPE};

const NS: &str = "http://kbpedia.org/kko/rc/";
const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const RDFS_SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
const SKOS_ALT: &str = "http://www.w3.org/2004/02/skos/core#altLabel";
const SKOS_DEF: &str = "http://www.w3.org/2004/02/skos/core#definition";
const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";

/// Predicates of each concept, in order. IRI-valued ones come first.
const PREDICATES: [(&str, bool); 5] = [
    (RDF_TYPE, true),
    (RDFS_SUBCLASS, true),
    (RDFS_LABEL, false),
    (SKOS_ALT, false),
    (SKOS_DEF, false),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub triples: usize,
    /// Target mean canonical line length in bytes.
    pub mean_line_len: f64,
    pub min_line_len: usize,
    pub max_line_len: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            triples: 10_000,
            mean_line_len: 130.56,
            min_line_len: 78,
            max_line_len: 3873,
        }
    }
}

/// Fractions of a version's triples removed, re-valued and added by [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveRates {
    pub delete: f64,
    pub update: f64,
    pub add: f64,
}

impl Default for EvolveRates {
    fn default() -> Self {
        Self {
            delete: 0.3105,
            update: 0.0536,
            add: 0.0917,
        }
    }
}

struct Gen {
    rng: ChaCha8Rng,
    lengths: Exp<f64>,
    spec: SynthSpec,
}

impl Gen {
    fn new(spec: SynthSpec, seed: u64) -> Self {
        let excess = (spec.mean_line_len - spec.min_line_len as f64).max(1.0);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            lengths: Exp::new(1.0 / excess).expect("positive rate"),
            spec,
        }
    }

    fn target_len(&mut self) -> usize {
        let extra = self.lengths.sample(&mut self.rng).round() as usize;
        (self.spec.min_line_len + extra).min(self.spec.max_line_len)
    }

    fn word(&mut self, len: usize) -> String {
        const ALPHA: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
        (0..len)
            .map(|_| ALPHA[self.rng.gen_range(0..ALPHA.len())] as char)
            .collect()
    }

    fn text(&mut self, len: usize) -> String {
        let mut s = String::with_capacity(len);
        while s.len() < len {
            if !s.is_empty() {
                s.push(' ');
            }
            let w = self.rng.gen_range(2..10);
            s.push_str(&self.word(w));
        }
        s.truncate(len);
        if s.ends_with(' ') {
            s.pop();
            s.push('x');
        }
        s
    }

    /// Object for `(subject, predicate)` whose canonical line is close to `target` bytes.
    fn object(&mut self, subject: &Term, predicate: &str, iri_valued: bool, target: usize) -> Term {
        if predicate == RDF_TYPE {
            return Term::iri(OWL_CLASS).expect("valid IRI");
        }
        let probe = if iri_valued {
            Term::iri(NS).expect("valid IRI")
        } else {
            Term::literal(Literal::simple(""))
        };
        let fixed =
            canonical_line(&Triple::new(subject.clone(), predicate, probe).expect("valid triple"))
                .len();
        let room = target.saturating_sub(fixed).max(1);
        if iri_valued {
            let mut name = self.word(room);
            if let Some(first) = name.get_mut(..1) {
                first.make_ascii_uppercase();
            }
            Term::iri(format!("{NS}{name}")).expect("valid IRI")
        } else {
            Term::literal(Literal::simple(self.text(room)))
        }
    }

    fn concept(id: u64) -> Term {
        Term::iri(format!("{NS}C{id}")).expect("valid IRI")
    }
}

/// `spec.triples` distinct triples. Every (subject, predicate) pair has a
/// single object.
pub fn generate(spec: &SynthSpec, seed: u64) -> Vec<Triple> {
    let mut g = Gen::new(*spec, seed);
    (0..spec.triples)
        .map(|i| {
            let (pred, iri) = PREDICATES[i % PREDICATES.len()];
            let subject = Gen::concept((i / PREDICATES.len()) as u64);
            let target = g.target_len();
            let object = g.object(&subject, pred, iri, target);
            Triple::new(subject, pred, object).expect("valid triple")
        })
        .collect()
}

/// Next version of `base`: deletes `rates.delete` of it, gives `rates.update`
/// of it a new object under the same subject and predicate, and adds
/// `rates.add` new triples about new concepts. Diffing `base` against the
/// result classifies exactly those counts.
pub fn evolve(base: &[Triple], rates: &EvolveRates, seed: u64) -> Vec<Triple> {
    let mut g = Gen::new(SynthSpec::default(), seed);
    let n = base.len();
    let n_del = (n as f64 * rates.delete).round() as usize;
    let n_upd = ((n as f64 * rates.update).round() as usize).min(n - n_del.min(n));
    let n_add = (n as f64 * rates.add).round() as usize;

    // rdf:type objects are fixed, so only other predicates can be re-valued.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut g.rng);
    let (updatable, fixed): (Vec<usize>, Vec<usize>) = order
        .into_iter()
        .partition(|&i| base[i].predicate() != RDF_TYPE);
    let n_upd = n_upd.min(updatable.len());
    let updated: Vec<usize> = updatable[..n_upd].to_vec();
    let mut rest: Vec<usize> = updatable[n_upd..].iter().chain(&fixed).copied().collect();
    rest.shuffle(&mut g.rng);
    let deleted: std::collections::HashSet<usize> = rest.into_iter().take(n_del).collect();
    let updated: std::collections::HashSet<usize> = updated.into_iter().collect();

    let mut out = Vec::with_capacity(n - deleted.len() + n_add);
    for (i, t) in base.iter().enumerate() {
        if deleted.contains(&i) {
            continue;
        }
        if updated.contains(&i) {
            let iri = !t.object().is_literal();
            let target = canonical_line(t).len();
            loop {
                let o = g.object(t.subject(), t.predicate(), iri, target);
                if &o != t.object() {
                    out.push(t.with_object(o));
                    break;
                }
            }
        } else {
            out.push(t.clone());
        }
    }
    // Fresh concepts live in their own id range so their keys are new.
    let first_new = 1u64 << 40;
    for i in 0..n_add {
        let (pred, iri) = PREDICATES[i % PREDICATES.len()];
        let subject = Gen::concept(first_new + (i / PREDICATES.len()) as u64);
        let target = g.target_len();
        let object = g.object(&subject, pred, iri, target);
        out.push(Triple::new(subject, pred, object).expect("valid triple"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{diff, KnowledgeGraph};

    #[test]
    fn deterministic_and_distinct() {
        let spec = SynthSpec {
            triples: 2000,
            ..Default::default()
        };
        let a = generate(&spec, 42);
        assert_eq!(a, generate(&spec, 42));
        let set: KnowledgeGraph = a.iter().cloned().collect();
        assert_eq!(set.len(), 2000);
        assert_ne!(a, generate(&spec, 7));
    }

    #[test]
    fn line_lengths_track_target() {
        let spec = SynthSpec {
            triples: 20_000,
            ..Default::default()
        };
        let lens: Vec<usize> = generate(&spec, 1)
            .iter()
            .map(|t| canonical_line(t).len())
            .collect();
        let mean = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
        assert!((mean - 130.56).abs() / 130.56 < 0.01, "mean {mean}");
        assert!(*lens.iter().max().unwrap() <= 3873);
    }

    #[test]
    fn evolve_counts_survive_diff() {
        let base = generate(
            &SynthSpec {
                triples: 5000,
                ..Default::default()
            },
            3,
        );
        let next = evolve(&base, &EvolveRates::default(), 9);
        let old: KnowledgeGraph = base.iter().cloned().collect();
        let new: KnowledgeGraph = next.iter().cloned().collect();
        let d = diff(&old, &new);
        assert_eq!(d.deleted.len(), (5000.0 * 0.3105f64).round() as usize);
        assert_eq!(d.updated.len(), (5000.0 * 0.0536f64).round() as usize);
        assert_eq!(d.added.len(), (5000.0 * 0.0917f64).round() as usize);
    }
}
