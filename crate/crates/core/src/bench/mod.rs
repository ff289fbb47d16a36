//! Experiment harness: ingest a graph into every strategy, update it to a
//! second version, read it back, audit, and tabulate.

mod harness;
pub mod synth;
mod tables;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;
use crate::gas::GasSchedule;
use crate::ledger::LedgerConfig;
use crate::rdf::RdfError;
use crate::strategies::{
    AnchorMode, StrategyConfig, StrategyError, StrategyKind, DEFAULT_BATCH_SIZE,
};

pub use harness::{
    diff_ops, load_strategies, run_audit, run_ingest, run_pipeline, run_reconstruct, run_update,
    write_units, WriteLog,
};
pub use synth::{evolve, generate, EvolveRates, SynthSpec};
pub use tables::{emit_tables, render_tables, TableFormat, TABLE_NAMES};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error("{strategy}: {source}")]
    Strategy {
        strategy: StrategyKind,
        #[source]
        source: StrategyError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A strategy read back something other than what was written.
    #[error("correctness gate failed: {0}")]
    Gate(String),
}

impl BenchError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn strategy(strategy: StrategyKind) -> impl FnOnce(StrategyError) -> Self {
        move |source| Self::Strategy { strategy, source }
    }

    pub fn is_gate_failure(&self) -> bool {
        matches!(self, BenchError::Gate(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub input_v1: Option<PathBuf>,
    pub input_v2: Option<PathBuf>,
    /// Corpus used when `input_v1` is absent.
    pub synthetic: SynthSpec,
    /// Evolution applied to the synthetic corpus when `input_v2` is absent
    /// and `synthetic_update` is set.
    pub evolve: EvolveRates,
    pub synthetic_update: bool,
    pub strategies: Vec<StrategyKind>,
    pub batch_size: usize,
    pub max_tx_payload_bytes: u64,
    pub gas: GasSchedule,
    pub bucket_width: u64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub anchor_mode: AnchorMode,
    /// Run strategies on separate threads. Durations are then not comparable.
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            input_v1: None,
            input_v2: None,
            synthetic: SynthSpec::default(),
            evolve: EvolveRates::default(),
            synthetic_update: true,
            strategies: StrategyKind::ALL.to_vec(),
            batch_size: DEFAULT_BATCH_SIZE,
            max_tx_payload_bytes: LedgerConfig::PRIVATE_MAX_TX_BYTES,
            gas: GasSchedule::default(),
            bucket_width: 100_000,
            output_dir: PathBuf::from("bench-out"),
            seed: 42,
            anchor_mode: AnchorMode::PerBatch,
            parallel: false,
        }
    }
}

impl BenchConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.bucket_width == 0 {
            return Err(BenchError::Config("bucket_width must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(BenchError::Config("no strategies selected".into()));
        }
        if self.batch_size == 0 {
            return Err(BenchError::Config("batch_size must be at least 1".into()));
        }
        let mut seen = self.strategies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return Err(BenchError::Config("strategy listed twice".into()));
        }
        self.strategy_config()
            .private_ledger
            .validate()
            .map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn strategy_config(&self) -> StrategyConfig {
        StrategyConfig {
            batch_size: self.batch_size,
            private_ledger: LedgerConfig {
                max_tx_payload_bytes: self.max_tx_payload_bytes,
                ..LedgerConfig::private()
            },
            gas: self.gas,
            anchor_mode: self.anchor_mode,
            ..StrategyConfig::default()
        }
    }

    pub fn ledger_dir(&self) -> PathBuf {
        self.output_dir.join("ledgers")
    }
}

/// min / max / total over a series of observations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub min: f64,
    pub max: f64,
    pub total: f64,
}

impl Summary {
    pub fn add(&mut self, x: f64) {
        if self.count == 0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.count += 1;
        self.total += x;
    }

    pub fn merge(&mut self, other: &Summary) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self.count += other.count;
        self.total += other.total;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total / self.count as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Ingest,
    Update,
}

/// Metrics for one bucket of consecutive ops (1-based numbering, update ops
/// continue after ingest ops).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub phase: Phase,
    pub strategy: StrategyKind,
    pub first_op: u64,
    pub last_op: u64,
    pub ops: u64,
    pub cumulative_disk_bytes: u64,
    /// Milliseconds per store call.
    pub write_ms: Summary,
    /// Gas per public transaction; `None` for the private strategy.
    pub gas: Option<Summary>,
    /// Characters carried per public transaction; `None` for the private strategy.
    pub tx_chars: Option<Summary>,
    /// Encoded length of each op.
    pub op_chars: Summary,
}

/// Totals of one phase for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTotals {
    pub phase: Phase,
    pub strategy: StrategyKind,
    pub ops: u64,
    pub write_ms: Summary,
    pub gas: Option<Summary>,
    pub tx_chars: Option<Summary>,
    pub op_chars: Summary,
    pub ledger_txs: u64,
    pub anchor_txs: u64,
    pub warnings: u64,
    pub disk_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadRow {
    pub phase: Phase,
    pub strategy: StrategyKind,
    pub triples: u64,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRow {
    pub strategy: StrategyKind,
    pub added: u64,
    pub updated: u64,
    pub deleted: u64,
    /// Store calls only.
    pub update_ms: f64,
    /// Store calls plus reading the updated graph back.
    pub total_ms: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffCounts {
    pub added: u64,
    pub updated: u64,
    pub deleted: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    pub strategies: Vec<StrategyKind>,
    pub bucket_width: u64,
    pub buckets: Vec<BucketRow>,
    pub totals: Vec<PhaseTotals>,
    pub reads: Vec<ReadRow>,
    pub updates: Vec<UpdateRow>,
    pub diff: Option<DiffCounts>,
    pub audit: Option<AuditReport>,
}

impl MetricsReport {
    pub fn merge(&mut self, other: MetricsReport) {
        for s in other.strategies {
            if !self.strategies.contains(&s) {
                self.strategies.push(s);
            }
        }
        if self.bucket_width == 0 {
            self.bucket_width = other.bucket_width;
        }
        self.buckets.extend(other.buckets);
        self.totals.extend(other.totals);
        self.reads.extend(other.reads);
        self.updates.extend(other.updates);
        if other.diff.is_some() {
            self.diff = other.diff;
        }
        if other.audit.is_some() {
            self.audit = other.audit;
        }
    }

    pub fn totals_for(&self, phase: Phase, strategy: StrategyKind) -> Option<&PhaseTotals> {
        self.totals
            .iter()
            .find(|t| t.phase == phase && t.strategy == strategy)
    }

    /// One JSON object per row, each tagged with its `record` kind.
    pub fn to_json_lines(&self) -> String {
        fn tagged<T: Serialize>(kind: &str, v: &T) -> String {
            let mut value = serde_json::to_value(v).expect("serializable");
            if let serde_json::Value::Object(map) = &mut value {
                map.insert("record".into(), kind.into());
            }
            value.to_string()
        }
        let mut out = String::new();
        let mut push = |line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        for b in &self.buckets {
            push(tagged("bucket", b));
        }
        for t in &self.totals {
            push(tagged("totals", t));
        }
        for r in &self.reads {
            push(tagged("read", r));
        }
        for u in &self.updates {
            push(tagged("update", u));
        }
        if let Some(d) = &self.diff {
            push(tagged("diff", d));
        }
        if let Some(a) = &self.audit {
            push(tagged(
                "audit",
                &serde_json::json!({
                    "batches_checked": a.batches_checked,
                    "matches": a.matches,
                    "mismatches": a.mismatches.len(),
                    "orphans": a.orphans.len(),
                    "unanchored": a.unanchored.len(),
                    "duplicates": a.duplicates.len(),
                }),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_arithmetic() {
        let mut s = Summary::default();
        assert_eq!(s.mean(), 0.0);
        for x in [3.0, 1.0, 2.0] {
            s.add(x);
        }
        assert_eq!((s.min, s.max, s.total, s.count), (1.0, 3.0, 6.0, 3));
        let mut t = Summary::default();
        t.merge(&s);
        t.merge(&Summary::default());
        assert_eq!(t, s);
    }

    #[test]
    fn config_defaults_and_validation() {
        let c: BenchConfig =
            serde_json::from_str(r#"{"bucket_width": 5, "gas": {"tx_base": 1}}"#).unwrap();
        assert_eq!(c.bucket_width, 5);
        assert_eq!(c.gas.tx_base, 1);
        assert_eq!(c.gas.calldata_nonzero_byte, 16);
        assert_eq!(c.strategies.len(), 4);
        assert!(c.validate().is_ok());
        assert!(BenchConfig {
            bucket_width: 0,
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(BenchConfig {
            strategies: vec![],
            ..c.clone()
        }
        .validate()
        .is_err());
        assert!(serde_json::from_str::<BenchConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
