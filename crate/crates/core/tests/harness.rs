mod common;

use std::path::Path;

use common::{random_ops, SetOracle};
use kgdlt::bench::{load_strategies, run_ingest, run_reconstruct, run_update, BenchConfig, Phase};
use kgdlt::query::{export_ntriples, IndexedGraph, TriplePattern};
use kgdlt::rdf::{parse_ntriples, read_graph_file, KnowledgeGraph, Triple};
use kgdlt::strategies::{
    build_strategy, decode_batch_payload, decode_direct_op, StrategyConfig, StrategyKind, TripleOp,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn t(s: &str, p: &str, o: &str) -> Triple {
    Triple::iris(
        &format!("http://ex.org/{s}"),
        &format!("http://ex.org/{p}"),
        &format!("http://ex.org/{o}"),
    )
    .unwrap()
}

fn files_config(dir: &Path, v1: &KnowledgeGraph, v2: &KnowledgeGraph) -> BenchConfig {
    let (p1, p2) = (dir.join("v1.nt"), dir.join("v2.nt"));
    std::fs::write(&p1, export_ntriples(v1)).unwrap();
    std::fs::write(&p2, export_ntriples(v2)).unwrap();
    BenchConfig {
        input_v1: Some(p1),
        input_v2: Some(p2),
        output_dir: dir.join("out"),
        ..BenchConfig::default()
    }
}

#[test]
fn ten_triples_give_ten_direct_txs_and_one_batch() {
    let dir = tempfile::tempdir().unwrap();
    let v1: KnowledgeGraph = (0..10).map(|i| t(&format!("s{i}"), "p", "o")).collect();
    let config = files_config(dir.path(), &v1, &v1);
    let report = run_ingest(&config).unwrap();
    let txs = |k| report.totals_for(Phase::Ingest, k).unwrap().ledger_txs;
    assert_eq!(txs(StrategyKind::PublicDirect), 10);
    assert_eq!(txs(StrategyKind::PublicContract), 10);
    assert_eq!(txs(StrategyKind::PrivateBatched), 1);
    assert_eq!(txs(StrategyKind::HybridAnchored), 1);

    let (rows, g) = run_reconstruct(&config, Phase::Ingest, Some(&v1)).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.triples == 10));
    assert_eq!(g, v1);
}

#[test]
fn identical_versions_dispatch_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let v1: KnowledgeGraph = [t("a", "p", "b"), t("a", "q", "c")].into_iter().collect();
    let config = files_config(dir.path(), &v1, &v1);
    run_ingest(&config).unwrap();
    let before: Vec<u64> = load_strategies(&config)
        .unwrap()
        .iter()
        .map(|s| s.disk_usage())
        .collect();
    let report = run_update(&config).unwrap();
    assert!(report.buckets.is_empty());
    assert_eq!(report.updates.len(), 4);
    for u in &report.updates {
        assert_eq!((u.added, u.updated, u.deleted, u.update_ms), (0, 0, 0, 0.0));
    }
    let after: Vec<u64> = load_strategies(&config)
        .unwrap()
        .iter()
        .map(|s| s.disk_usage())
        .collect();
    assert_eq!(before, after);
}

#[test]
fn changed_object_dispatches_one_update_per_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let v1: KnowledgeGraph = [t("s", "p", "a")].into_iter().collect();
    let v2: KnowledgeGraph = [t("s", "p", "b")].into_iter().collect();
    let config = files_config(dir.path(), &v1, &v2);
    run_ingest(&config).unwrap();
    let report = run_update(&config).unwrap();
    let expected = TripleOp::Update {
        old: t("s", "p", "a"),
        new: t("s", "p", "b"),
    };
    for s in load_strategies(&config).unwrap() {
        let totals = report.totals_for(Phase::Update, s.kind()).unwrap();
        assert_eq!(totals.ops, 1, "{}", s.kind());
        let (_, ledger) = s.ledgers()[0];
        let last = ledger.scan().last().unwrap();
        let ops = match s.kind() {
            StrategyKind::PublicDirect => vec![decode_direct_op(&last.payload).unwrap()],
            StrategyKind::PrivateBatched | StrategyKind::HybridAnchored => {
                decode_batch_payload(&last.payload).unwrap()
            }
            StrategyKind::PublicContract => {
                assert_eq!(ledger.tx_count(), 2);
                continue;
            }
        };
        assert_eq!(ops, vec![expected.clone()], "{}", s.kind());
        assert_eq!(s.reconstruct().unwrap(), v2);
    }
}

#[test]
fn empty_ledgers_reconstruct_empty() {
    let dir = tempfile::tempdir().unwrap();
    let empty = KnowledgeGraph::new();
    let config = files_config(dir.path(), &empty, &empty);
    run_ingest(&config).unwrap();
    let (rows, g) = run_reconstruct(&config, Phase::Ingest, Some(&empty)).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(g.is_empty());
    assert!(rows.iter().all(|r| r.triples == 0));
}

#[test]
fn five_thousand_random_ops_agree_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(5_000);
    let ops = random_ops(&mut rng, 40, 5_000);
    let mut oracle = SetOracle::default();
    ops.iter().for_each(|op| oracle.apply(op));
    let config = StrategyConfig {
        batch_size: 300,
        ..StrategyConfig::default()
    };
    let graphs: Vec<KnowledgeGraph> = StrategyKind::ALL
        .iter()
        .map(|&k| {
            let mut s = build_strategy(k, &config).unwrap();
            s.store(&ops).unwrap();
            s.reconstruct().unwrap()
        })
        .collect();
    for g in &graphs {
        assert!(oracle.matches(g));
        assert_eq!(g, &graphs[0]);
    }
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn subject_lookup_on_fixture_matches_filter() {
    let g = read_graph_file(&fixture("kbpedia_sample.ttl")).unwrap();
    assert_eq!(g.len(), 1000);
    let index = IndexedGraph::new(&g);
    for t in g.iter().step_by(37) {
        let pattern = TriplePattern {
            subject: Some(t.subject().clone()),
            ..TriplePattern::any()
        };
        let mut expected: Vec<&Triple> = g.iter().filter(|x| x.subject() == t.subject()).collect();
        expected.sort();
        assert_eq!(index.match_pattern(&pattern), expected);
    }
    assert_eq!(index.match_pattern(&TriplePattern::any()).len(), 1000);
}

#[test]
fn ten_thousand_triples_round_trip_through_export() {
    let g: KnowledgeGraph = kgdlt::bench::generate(&Default::default(), 9)
        .into_iter()
        .collect();
    assert_eq!(g.len(), 10_000);
    let back: KnowledgeGraph = parse_ntriples(&export_ntriples(&g))
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(back, g);
}
