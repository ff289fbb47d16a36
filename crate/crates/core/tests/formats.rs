//! Conformance fixtures and frozen wire formats.
//!
//! Golden files live in `tests/fixtures/golden`. Set `KGDLT_BLESS=1` to
//! rewrite them after an intentional format change.

use std::path::PathBuf;

use kgdlt::bench::{
    render_tables, BucketRow, DiffCounts, MetricsReport, Phase, PhaseTotals, ReadRow, Summary,
    TableFormat, UpdateRow,
};
use kgdlt::ledger::{sha256, Ledger, LedgerConfig};
use kgdlt::rdf::{
    canonical_line, parse_ntriples, parse_turtle, read_graph_file, KnowledgeGraph, Triple,
};
use kgdlt::strategies::{
    batch_triples, decode_direct_op, encode_direct_op, AnchorRecord, StrategyKind, TripleOp,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str, actual: &[u8]) {
    let path = fixture("golden").join(name);
    if std::env::var_os("KGDLT_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from golden file:\n{}",
        String::from_utf8_lossy(actual)
    );
}

fn hex_lines(bytes: &[u8]) -> String {
    bytes.chunks(32).map(|c| hex::encode(c) + "\n").collect()
}

fn assert_same_graph(ours: &KnowledgeGraph, reference: &KnowledgeGraph) {
    let a = ours.sorted_lines();
    let b = reference.sorted_lines();
    let only_ours: Vec<_> = a.iter().filter(|l| !b.contains(l)).take(5).collect();
    let only_ref: Vec<_> = b.iter().filter(|l| !a.contains(l)).take(5).collect();
    assert!(
        only_ours.is_empty() && only_ref.is_empty(),
        "ours only: {only_ours:#?}\nreference only: {only_ref:#?}"
    );
}

fn reference_graph(name: &str) -> KnowledgeGraph {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    parse_ntriples(&text).unwrap().into_iter().collect()
}

#[test]
fn ntriples_sample_matches_reference_parser() {
    let ours = read_graph_file(&fixture("sample_100.nt")).unwrap();
    let reference = reference_graph("sample_100.expected.nt");
    assert_eq!(ours.len(), 96);
    assert_same_graph(&ours, &reference);
}

#[test]
fn turtle_sample_matches_reference_parser() {
    let text = std::fs::read_to_string(fixture("kbpedia_sample.ttl")).unwrap();
    let triples = parse_turtle(&text).unwrap();
    assert_eq!(triples.len(), 1000);
    let ours: KnowledgeGraph = triples.into_iter().collect();
    assert_same_graph(&ours, &reference_graph("kbpedia_sample.expected.nt"));
    assert_eq!(
        read_graph_file(&fixture("kbpedia_sample.ttl")).unwrap(),
        ours
    );
}

#[test]
fn canonical_lines_are_a_fixed_point() {
    let g = read_graph_file(&fixture("sample_100.nt")).unwrap();
    let text: String = g.sorted_lines().iter().map(|l| format!("{l}\n")).collect();
    let again: KnowledgeGraph = parse_ntriples(&text).unwrap().into_iter().collect();
    assert_eq!(again.sorted_lines(), g.sorted_lines());
    golden("sample_100.canonical.nt", text.as_bytes());
}

fn t(s: &str, o: &str) -> Triple {
    Triple::iris(
        &format!("http://ex.org/{s}"),
        "http://ex.org/p",
        &format!("http://ex.org/{o}"),
    )
    .unwrap()
}

#[test]
fn direct_op_wire_format() {
    let old = t("a", "b");
    let new = t("a", "c");
    let line_old = canonical_line(&old);
    let line_new = canonical_line(&new);
    let cases = [
        (TripleOp::Insert(old.clone()), line_old.clone()),
        (TripleOp::Delete(old.clone()), format!("DELETE:{line_old}")),
        (
            TripleOp::Update {
                old: old.clone(),
                new: new.clone(),
            },
            format!(
                "UPDATE:{}|{line_old}{}|{line_new}",
                line_old.len(),
                line_new.len()
            ),
        ),
    ];
    let mut dump = String::new();
    for (op, expected) in cases {
        let bytes = encode_direct_op(&op);
        assert_eq!(bytes, expected.as_bytes());
        assert_eq!(decode_direct_op(&bytes).unwrap(), op);
        dump.push_str(&expected);
        dump.push('\n');
    }
    golden("direct_ops.txt", dump.as_bytes());
}

#[test]
fn batch_wire_format() {
    let ops = vec![TripleOp::Insert(t("a", "b")), TripleOp::Delete(t("c", "d"))];
    let batches = batch_triples(&ops, 10, 1 << 20).unwrap();
    assert_eq!(batches.len(), 1);
    let mut expected = 2u64.to_le_bytes().to_vec();
    for op in &ops {
        let enc = encode_direct_op(op);
        expected.extend_from_slice(&(enc.len() as u64).to_le_bytes());
        expected.extend_from_slice(&enc);
    }
    assert_eq!(batches[0].payload, expected);
    assert_eq!(batches[0].batch_hash, sha256(&expected));
    golden("batch_payload.hex", hex_lines(&expected).as_bytes());
}

#[test]
fn anchor_wire_format() {
    let record = AnchorRecord {
        hash: sha256(b"batch"),
        submitter: "kg-writer".into(),
        logical_timestamp: 7,
        metadata: "ledger=private;tx=3;ops=2;bytes=150".into(),
    };
    let mut expected = sha256(b"batch").to_vec();
    expected.extend_from_slice(&9u64.to_le_bytes());
    expected.extend_from_slice(b"kg-writer");
    expected.extend_from_slice(&7u64.to_le_bytes());
    expected.extend_from_slice(&35u64.to_le_bytes());
    expected.extend_from_slice(b"ledger=private;tx=3;ops=2;bytes=150");
    assert_eq!(record.encode(), expected);
    assert_eq!(AnchorRecord::decode(&expected).unwrap(), record);
    let target = record.target().unwrap();
    assert_eq!((target.private_tx, target.op), (3, None));
    golden("anchor_record.hex", hex_lines(&expected).as_bytes());
}

#[test]
fn ledger_file_format() {
    let mut l = Ledger::new(LedgerConfig {
        block_capacity: 2,
        max_tx_payload_bytes: 1024,
    })
    .unwrap();
    for (i, p) in ["first", "second", "third"].iter().enumerate() {
        l.append_transaction(p.as_bytes().to_vec(), "writer", 100 * i as u64)
            .unwrap();
    }
    let bytes = l.to_bytes();
    assert_eq!(&bytes[..4], b"LGR1");
    assert_eq!(bytes.len() as u64, l.disk_usage());
    assert_eq!(Ledger::from_bytes(&bytes).unwrap().to_bytes(), bytes);
    golden("ledger.hex", hex_lines(&bytes).as_bytes());
}

fn summary(xs: &[f64]) -> Summary {
    let mut s = Summary::default();
    xs.iter().for_each(|x| s.add(*x));
    s
}

fn fixed_report() -> MetricsReport {
    let kinds = [StrategyKind::PublicDirect, StrategyKind::PrivateBatched];
    let mut r = MetricsReport {
        strategies: kinds.to_vec(),
        bucket_width: 2,
        ..MetricsReport::default()
    };
    for (phase, first) in [(Phase::Ingest, 1u64), (Phase::Update, 4)] {
        for kind in kinds {
            let metered = kind.is_gas_metered();
            let gas = metered.then(|| summary(&[22_248.0, 23_096.0]));
            let chars = metered.then(|| summary(&[78.0, 131.0]));
            r.buckets.push(BucketRow {
                phase,
                strategy: kind,
                first_op: first,
                last_op: first + 1,
                ops: 2,
                cumulative_disk_bytes: 1000 * first,
                write_ms: summary(&[0.5, 1.5]),
                gas,
                tx_chars: chars,
                op_chars: summary(&[78.0, 131.0]),
            });
            r.totals.push(PhaseTotals {
                phase,
                strategy: kind,
                ops: 2,
                write_ms: summary(&[0.5, 1.5]),
                gas,
                tx_chars: chars,
                op_chars: summary(&[78.0, 131.0]),
                ledger_txs: if metered { 2 } else { 1 },
                anchor_txs: 0,
                warnings: 0,
                disk_bytes: 1000 * first,
            });
            r.reads.push(ReadRow {
                phase,
                strategy: kind,
                triples: 3,
                duration_ms: 2.25,
            });
        }
    }
    for kind in kinds {
        r.updates.push(UpdateRow {
            strategy: kind,
            added: 1,
            updated: 0,
            deleted: 1,
            update_ms: 3.0,
            total_ms: 5.25,
        });
    }
    r.diff = Some(DiffCounts {
        added: 1,
        updated: 0,
        deleted: 1,
    });
    r
}

#[test]
fn table_layout() {
    let report = fixed_report();
    for (format, ext) in [(TableFormat::Csv, "csv"), (TableFormat::Markdown, "md")] {
        let tables = render_tables(&report, format);
        let all: String = tables
            .iter()
            .map(|(name, body)| format!("==> {name}\n{body}"))
            .collect();
        golden(&format!("tables.{ext}.txt"), all.as_bytes());
    }
}
