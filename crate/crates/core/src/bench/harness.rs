use std::ops::Range;
use std::time::Instant;

use crate::audit::{audit_all, AuditReport};
use crate::ledger::Ledger;
use crate::rdf::{diff, read_graph_file, KnowledgeGraph, Triple};
use crate::strategies::{
    build_strategy, encode_direct_op, ledger_path, load_strategy, persist_strategy, LedgerRole,
    StorageStrategy, StrategyError, StrategyKind, TripleOp,
};

use super::synth::{evolve, generate};
use super::{
    BenchConfig, BenchError, BucketRow, DiffCounts, MetricsReport, Phase, PhaseTotals, ReadRow,
    Summary, UpdateRow,
};

type Strategies = Vec<Box<dyn StorageStrategy>>;

/// Splits `len` ops, numbered from `first_op`, into store calls of at most
/// `per_write` ops that never straddle a bucket boundary.
pub fn write_units(
    len: usize,
    per_write: usize,
    first_op: u64,
    bucket_width: u64,
) -> Vec<Range<usize>> {
    let mut units = Vec::new();
    let mut i = 0usize;
    while i < len {
        let number = first_op + i as u64;
        let to_boundary = bucket_width - (number - 1) % bucket_width;
        let n = (per_write as u64).min(to_boundary).min((len - i) as u64) as usize;
        units.push(i..i + n);
        i += n;
    }
    units
}

/// Per-bucket rows and totals of one phase for one strategy.
#[derive(Debug, Clone)]
pub struct WriteLog {
    pub rows: Vec<BucketRow>,
    pub totals: PhaseTotals,
}

fn drive(
    strategy: &mut dyn StorageStrategy,
    ops: &[TripleOp],
    phase: Phase,
    first_op: u64,
    config: &BenchConfig,
) -> Result<WriteLog, StrategyError> {
    let kind = strategy.kind();
    let metered = kind.is_gas_metered();
    let width = config.bucket_width;
    let per_write = kind.ops_per_write(config.batch_size);
    let last_number = first_op + ops.len() as u64 - 1;

    let empty_row = |number: u64| {
        let bucket_start = (number - 1) / width * width + 1;
        BucketRow {
            phase,
            strategy: kind,
            first_op: bucket_start,
            last_op: (bucket_start + width - 1).min(last_number),
            ops: 0,
            cumulative_disk_bytes: 0,
            write_ms: Summary::default(),
            gas: metered.then(Summary::default),
            tx_chars: metered.then(Summary::default),
            op_chars: Summary::default(),
        }
    };
    let mut totals = PhaseTotals {
        phase,
        strategy: kind,
        ops: 0,
        write_ms: Summary::default(),
        gas: metered.then(Summary::default),
        tx_chars: metered.then(Summary::default),
        op_chars: Summary::default(),
        ledger_txs: 0,
        anchor_txs: 0,
        warnings: 0,
        disk_bytes: 0,
    };
    let mut rows = Vec::new();
    let mut row: Option<BucketRow> = None;

    for unit in write_units(ops.len(), per_write, first_op, width) {
        let number = first_op + unit.start as u64;
        let cur = row.get_or_insert_with(|| empty_row(number));
        let chunk = &ops[unit.clone()];
        for op in chunk {
            cur.op_chars.add(encode_direct_op(op).len() as f64);
        }
        let started = Instant::now();
        let receipt = strategy.store(chunk)?;
        let ms = started.elapsed().as_secs_f64() * 1e3;
        cur.write_ms.add(ms);
        cur.ops += chunk.len() as u64;
        if let (Some(gas), Some(chars)) = (cur.gas.as_mut(), cur.tx_chars.as_mut()) {
            for tx in &receipt.public_txs {
                gas.add(tx.gas as f64);
                chars.add(tx.chars as f64);
            }
        }
        totals.ledger_txs += receipt.tx_indices.len() as u64;
        totals.anchor_txs += receipt.anchor_tx_indices.len() as u64;
        totals.warnings += receipt.warnings;

        let end_number = first_op + unit.end as u64 - 1;
        if end_number == cur.last_op {
            let mut done = row.take().expect("row in progress");
            done.cumulative_disk_bytes = strategy.disk_usage();
            rows.push(done);
        }
    }
    debug_assert!(row.is_none());

    for r in &rows {
        totals.ops += r.ops;
        totals.write_ms.merge(&r.write_ms);
        totals.op_chars.merge(&r.op_chars);
        if let (Some(t), Some(g)) = (totals.gas.as_mut(), r.gas.as_ref()) {
            t.merge(g);
        }
        if let (Some(t), Some(c)) = (totals.tx_chars.as_mut(), r.tx_chars.as_ref()) {
            t.merge(c);
        }
    }
    totals.disk_bytes = strategy.disk_usage();
    Ok(WriteLog { rows, totals })
}

/// Runs `f` over every strategy, on scoped threads when `parallel` is set.
fn for_each_strategy<T: Send>(
    strategies: &mut Strategies,
    parallel: bool,
    f: impl Fn(&mut dyn StorageStrategy) -> Result<T, BenchError> + Sync,
) -> Result<Vec<T>, BenchError> {
    if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = strategies
                .iter_mut()
                .map(|s| scope.spawn(|| f(s.as_mut())))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("strategy thread panicked"))
                .collect()
        })
    } else {
        strategies.iter_mut().map(|s| f(s.as_mut())).collect()
    }
}

fn graph_order(g: &KnowledgeGraph) -> Vec<Triple> {
    g.sorted().into_iter().cloned().collect()
}

/// The two input versions: files when given, otherwise the synthetic corpus
/// and its evolution.
fn load_inputs(config: &BenchConfig) -> Result<(Vec<Triple>, Option<Vec<Triple>>), BenchError> {
    let v1 = match &config.input_v1 {
        Some(path) => graph_order(&read_graph_file(path)?),
        None => generate(&config.synthetic, config.seed),
    };
    let v2 = match &config.input_v2 {
        Some(path) => Some(graph_order(&read_graph_file(path)?)),
        None if config.synthetic_update => {
            Some(evolve(&v1, &config.evolve, config.seed.wrapping_add(1)))
        }
        None => None,
    };
    Ok((v1, v2))
}

fn persist_all(strategies: &Strategies, config: &BenchConfig) -> Result<(), BenchError> {
    let dir = config.ledger_dir();
    std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    for s in strategies {
        persist_strategy(s.as_ref(), &dir).map_err(BenchError::strategy(s.kind()))?;
    }
    Ok(())
}

pub fn load_strategies(config: &BenchConfig) -> Result<Strategies, BenchError> {
    let sc = config.strategy_config();
    let dir = config.ledger_dir();
    config
        .strategies
        .iter()
        .map(|&k| load_strategy(k, &sc, &dir).map_err(BenchError::strategy(k)))
        .collect()
}

/// Inserts the first version into every selected strategy and persists the
/// ledgers under `output_dir/ledgers`.
pub fn run_ingest(config: &BenchConfig) -> Result<MetricsReport, BenchError> {
    config.validate()?;
    let (v1, _) = load_inputs(config)?;
    let ops: Vec<TripleOp> = v1.into_iter().map(TripleOp::Insert).collect();
    let sc = config.strategy_config();
    let mut strategies: Strategies = config
        .strategies
        .iter()
        .map(|&k| build_strategy(k, &sc).map_err(BenchError::strategy(k)))
        .collect::<Result<_, _>>()?;
    let logs = for_each_strategy(&mut strategies, config.parallel, |s| {
        if ops.is_empty() {
            return Ok(None);
        }
        let kind = s.kind();
        drive(s, &ops, Phase::Ingest, 1, config)
            .map(Some)
            .map_err(BenchError::strategy(kind))
    })?;
    persist_all(&strategies, config)?;

    let mut report = MetricsReport {
        strategies: config.strategies.clone(),
        bucket_width: config.bucket_width,
        ..Default::default()
    };
    for log in logs.into_iter().flatten() {
        report.buckets.extend(log.rows);
        report.totals.push(log.totals);
    }
    Ok(report)
}

/// Loads the persisted ledgers, times `reconstruct()` for each strategy and
/// checks that all of them, and `expected` when given, agree.
pub fn run_reconstruct(
    config: &BenchConfig,
    phase: Phase,
    expected: Option<&KnowledgeGraph>,
) -> Result<(Vec<ReadRow>, KnowledgeGraph), BenchError> {
    config.validate()?;
    let strategies = load_strategies(config)?;
    let mut rows = Vec::new();
    let mut graphs: Vec<(StrategyKind, KnowledgeGraph)> = Vec::new();
    for s in &strategies {
        let started = Instant::now();
        let g = s.reconstruct().map_err(BenchError::strategy(s.kind()))?;
        let duration_ms = started.elapsed().as_secs_f64() * 1e3;
        rows.push(ReadRow {
            phase,
            strategy: s.kind(),
            triples: g.len() as u64,
            duration_ms,
        });
        graphs.push((s.kind(), g));
    }
    let (first_kind, reference) = graphs.swap_remove(0);
    for (kind, g) in &graphs {
        if *g != reference {
            return Err(BenchError::Gate(format!(
                "{kind} reconstructs {} triples, {first_kind} reconstructs {}; the graphs differ",
                g.len(),
                reference.len()
            )));
        }
    }
    if let Some(want) = expected {
        if *want != reference {
            return Err(BenchError::Gate(format!(
                "reconstructed graph has {} triples, expected graph has {}; the graphs differ",
                reference.len(),
                want.len()
            )));
        }
    }
    Ok((rows, reference))
}

/// Ops turning `old` into `new`: deletes, then updates, then inserts.
pub fn diff_ops(old: &KnowledgeGraph, new: &KnowledgeGraph) -> (Vec<TripleOp>, DiffCounts) {
    let d = diff(old, new);
    let counts = DiffCounts {
        added: d.added.len() as u64,
        updated: d.updated.len() as u64,
        deleted: d.deleted.len() as u64,
    };
    let mut ops = Vec::with_capacity(d.op_count());
    ops.extend(d.deleted.into_iter().map(TripleOp::Delete));
    ops.extend(
        d.updated
            .into_iter()
            .map(|(old, new)| TripleOp::Update { old, new }),
    );
    ops.extend(d.added.into_iter().map(TripleOp::Insert));
    (ops, counts)
}

/// Applies the diff from the first to the second version to the persisted
/// ledgers, re-persists them and reads them back. The read-back must equal
/// the second version.
pub fn run_update(config: &BenchConfig) -> Result<MetricsReport, BenchError> {
    config.validate()?;
    let (v1, v2) = load_inputs(config)?;
    let v2 =
        v2.ok_or_else(|| BenchError::Config("update needs input_v2 or synthetic_update".into()))?;
    let first_op = v1.len() as u64 + 1;
    let old: KnowledgeGraph = v1.into_iter().collect();
    let new: KnowledgeGraph = v2.into_iter().collect();
    let (ops, counts) = diff_ops(&old, &new);

    let mut strategies = load_strategies(config)?;
    let logs = for_each_strategy(&mut strategies, config.parallel, |s| {
        if ops.is_empty() {
            return Ok(None);
        }
        let kind = s.kind();
        drive(s, &ops, Phase::Update, first_op, config)
            .map(Some)
            .map_err(BenchError::strategy(kind))
    })?;
    persist_all(&strategies, config)?;
    drop(strategies);

    let (reads, _) = run_reconstruct(config, Phase::Update, Some(&new))?;
    let mut report = MetricsReport {
        strategies: config.strategies.clone(),
        bucket_width: config.bucket_width,
        diff: Some(counts),
        ..Default::default()
    };
    let logs: Vec<_> = logs.into_iter().flatten().collect();
    for kind in &config.strategies {
        let update_ms = logs
            .iter()
            .find(|l| l.totals.strategy == *kind)
            .map_or(0.0, |l| l.totals.write_ms.total);
        let read_ms = reads
            .iter()
            .find(|r| r.strategy == *kind)
            .map_or(0.0, |r| r.duration_ms);
        report.updates.push(UpdateRow {
            strategy: *kind,
            added: counts.added,
            updated: counts.updated,
            deleted: counts.deleted,
            update_ms,
            total_ms: update_ms + read_ms,
        });
    }
    for log in logs {
        report.buckets.extend(log.rows);
        report.totals.push(log.totals);
    }
    report.reads = reads;
    Ok(report)
}

/// Audits the hybrid ledgers, when the hybrid strategy is selected.
pub fn run_audit(config: &BenchConfig) -> Result<Option<AuditReport>, BenchError> {
    if !config.strategies.contains(&StrategyKind::HybridAnchored) {
        return Ok(None);
    }
    let dir = config.ledger_dir();
    let load = |role| {
        Ledger::load(&ledger_path(&dir, StrategyKind::HybridAnchored, role))
            .map_err(|e| BenchError::strategy(StrategyKind::HybridAnchored)(e.into()))
    };
    let private = load(LedgerRole::Private)?;
    let public = load(LedgerRole::Public)?;
    Ok(Some(audit_all(&private, &public)))
}

/// Ingest, read back, update, read back, audit.
pub fn run_pipeline(config: &BenchConfig) -> Result<MetricsReport, BenchError> {
    let mut report = run_ingest(config)?;
    let (v1, v2) = load_inputs(config)?;
    let v1: KnowledgeGraph = v1.into_iter().collect();
    let (reads, _) = run_reconstruct(config, Phase::Ingest, Some(&v1))?;
    report.reads = reads;
    if v2.is_some() {
        report.merge(run_update(config)?);
    }
    report.audit = run_audit(config)?;
    Ok(report)
}
