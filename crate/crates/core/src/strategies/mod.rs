//! The four ways of keeping a knowledge graph on a ledger, behind one contract.
//!
//! | strategy          | writes                                    | reconstruct            |
//! |-------------------|-------------------------------------------|------------------------|
//! | `public_direct`   | one public tx per op, raw encoded op      | replay the whole chain |
//! | `public_contract` | one public tx per op, call + event + sstore | contract state map   |
//! | `private_batched` | one private tx per batch of ops           | world-state map        |
//! | `hybrid_anchored` | as private, plus a public anchor per batch | world-state map       |

mod anchor;
mod batch;
mod encoding;
mod hybrid;
mod private_batched;
mod public_contract;
mod public_direct;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::gas::GasSchedule;
use crate::ledger::{Ledger, LedgerConfig, LedgerError};
use crate::rdf::{canonical_line, KnowledgeGraph, Triple};

pub use anchor::{anchor_batch, append_anchor, AnchorRecord, AnchorTarget};
pub use batch::{batch_triples, Batch};
pub use encoding::{
    decode_batch_payload, decode_direct_op, encode_batch_payload, encode_direct_op,
    split_batch_payload, DecodeError, DELETE_PREFIX, UPDATE_PREFIX,
};
pub use hybrid::HybridAnchored;
pub use private_batched::PrivateBatched;
pub use public_contract::{PublicContract, CONTRACT_EVENT_TOPICS};
pub use public_direct::PublicDirect;

/// Default number of ops per private batch.
pub const DEFAULT_BATCH_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TripleOp {
    Insert(Triple),
    Delete(Triple),
    Update { old: Triple, new: Triple },
}

impl TripleOp {
    pub fn kind(&self) -> OpKind {
        match self {
            TripleOp::Insert(_) => OpKind::Insert,
            TripleOp::Delete(_) => OpKind::Delete,
            TripleOp::Update { .. } => OpKind::Update,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Insert,
    Delete,
    Update,
}

/// Outcome of applying one op to a state map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Applied {
    Changed,
    /// Insert of a present triple, or delete of an absent one.
    NoOp,
}

/// Set semantics shared by every strategy: inserts add, deletes remove,
/// updates remove the old triple and then insert the new one.
pub(crate) fn apply_op(state: &mut KnowledgeGraph, op: &TripleOp) -> Applied {
    let changed = match op {
        TripleOp::Insert(t) => state.insert(t.clone()),
        TripleOp::Delete(t) => state.remove(t),
        TripleOp::Update { old, new } => {
            let removed = state.remove(old);
            state.insert(new.clone()) || removed
        }
    };
    if changed {
        Applied::Changed
    } else {
        Applied::NoOp
    }
}

/// Rejects a sequence in which some update's old triple is absent at the
/// point the update would run. Nothing is mutated.
pub(crate) fn check_update_targets(
    state: &KnowledgeGraph,
    ops: &[TripleOp],
) -> Result<(), StrategyError> {
    let mut added: HashSet<&Triple> = HashSet::new();
    let mut removed: HashSet<&Triple> = HashSet::new();
    for op in ops {
        match op {
            TripleOp::Insert(t) => {
                removed.remove(t);
                added.insert(t);
            }
            TripleOp::Delete(t) => {
                added.remove(t);
                removed.insert(t);
            }
            TripleOp::Update { old, new } => {
                let present =
                    added.contains(old) || (state.contains(old) && !removed.contains(old));
                if !present {
                    return Err(StrategyError::MissingUpdateTarget {
                        triple: canonical_line(old),
                    });
                }
                added.remove(old);
                removed.insert(old);
                removed.remove(new);
                added.insert(new);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    PublicDirect,
    PublicContract,
    PrivateBatched,
    HybridAnchored,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::PublicDirect,
        StrategyKind::PublicContract,
        StrategyKind::PrivateBatched,
        StrategyKind::HybridAnchored,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::PublicDirect => "public_direct",
            StrategyKind::PublicContract => "public_contract",
            StrategyKind::PrivateBatched => "private_batched",
            StrategyKind::HybridAnchored => "hybrid_anchored",
        }
    }

    /// Column heading used in rendered tables.
    pub fn title(&self) -> &'static str {
        match self {
            StrategyKind::PublicDirect => "Public DLT Direct",
            StrategyKind::PublicContract => "Public DLT Smart contracts",
            StrategyKind::PrivateBatched => "Private DLT",
            StrategyKind::HybridAnchored => "Hybrid DLT",
        }
    }

    pub fn is_gas_metered(&self) -> bool {
        !matches!(self, StrategyKind::PrivateBatched)
    }

    /// Ops handed to one `store` call by a client: one for the public
    /// strategies, one batch for the private and hybrid ones.
    pub fn ops_per_write(&self, batch_size: usize) -> usize {
        match self {
            StrategyKind::PublicDirect | StrategyKind::PublicContract => 1,
            StrategyKind::PrivateBatched | StrategyKind::HybridAnchored => batch_size.max(1),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorMode {
    /// One anchor per private batch transaction.
    #[default]
    PerBatch,
    /// One anchor per op inside each batch.
    PerOperation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub batch_size: usize,
    pub public_ledger: LedgerConfig,
    pub private_ledger: LedgerConfig,
    pub gas: GasSchedule,
    pub submitter: String,
    pub anchor_mode: AnchorMode,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            batch_size: DEFAULT_BATCH_SIZE,
            public_ledger: LedgerConfig::public(),
            private_ledger: LedgerConfig::private(),
            gas: GasSchedule::default(),
            submitter: "kg-writer".to_string(),
            anchor_mode: AnchorMode::PerBatch,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StrategyError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("single op needs {len} bytes, above the {limit}-byte transaction limit")]
    OversizeOp { len: u64, limit: u64 },
    #[error("update target is not in the current state: {triple}")]
    MissingUpdateTarget { triple: String },
    #[error("cannot anchor an empty batch")]
    EmptyBatch,
    #[error("malformed payload in transaction {tx_index}: {source}")]
    MalformedPayload {
        tx_index: u64,
        #[source]
        source: DecodeError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Public-ledger cost of one transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicTxCost {
    pub gas: u64,
    /// Characters of data carried: the encoded op, or the anchor metadata.
    pub chars: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoreReceipt {
    /// Transactions holding the ops (public for the public strategies, private otherwise).
    pub tx_indices: Vec<u64>,
    /// Public anchor transactions (hybrid only).
    pub anchor_tx_indices: Vec<u64>,
    /// One entry per gas-metered transaction.
    pub public_txs: Vec<PublicTxCost>,
    pub total_gas: u64,
    pub total_payload_bytes: u64,
    pub op_count: usize,
    /// Duplicate inserts and deletes of absent triples.
    pub warnings: u64,
}

impl StoreReceipt {
    pub(crate) fn add_public(&mut self, gas: u64, chars: usize) {
        self.public_txs.push(PublicTxCost {
            gas,
            chars: chars as u64,
        });
        self.total_gas += gas;
    }

    pub fn merge(&mut self, other: StoreReceipt) {
        self.tx_indices.extend(other.tx_indices);
        self.anchor_tx_indices.extend(other.anchor_tx_indices);
        self.public_txs.extend(other.public_txs);
        self.total_gas += other.total_gas;
        self.total_payload_bytes += other.total_payload_bytes;
        self.op_count += other.op_count;
        self.warnings += other.warnings;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerRole {
    Public,
    Private,
}

impl LedgerRole {
    pub fn name(&self) -> &'static str {
        match self {
            LedgerRole::Public => "public",
            LedgerRole::Private => "private",
        }
    }
}

/// Uniform storage contract. Implementations own their ledgers and state;
/// callers serialize mutations.
pub trait StorageStrategy: Send + Sync {
    fn kind(&self) -> StrategyKind;

    fn store(&mut self, ops: &[TripleOp]) -> Result<StoreReceipt, StrategyError>;

    fn reconstruct(&self) -> Result<KnowledgeGraph, StrategyError>;

    fn ledgers(&self) -> Vec<(LedgerRole, &Ledger)>;

    /// Persisted bytes across all ledgers of the strategy.
    fn disk_usage(&self) -> u64 {
        self.ledgers().iter().map(|(_, l)| l.disk_usage()).sum()
    }
}

pub fn build_strategy(
    kind: StrategyKind,
    config: &StrategyConfig,
) -> Result<Box<dyn StorageStrategy>, StrategyError> {
    Ok(match kind {
        StrategyKind::PublicDirect => Box::new(PublicDirect::new(config)?),
        StrategyKind::PublicContract => Box::new(PublicContract::new(config)?),
        StrategyKind::PrivateBatched => Box::new(PrivateBatched::new(config)?),
        StrategyKind::HybridAnchored => Box::new(HybridAnchored::new(config)?),
    })
}

pub fn ledger_path(dir: &Path, kind: StrategyKind, role: LedgerRole) -> PathBuf {
    dir.join(format!("{}.{}.lgr", kind.name(), role.name()))
}

/// Writes every ledger of `strategy` into `dir`.
pub fn persist_strategy(strategy: &dyn StorageStrategy, dir: &Path) -> Result<(), StrategyError> {
    for (role, ledger) in strategy.ledgers() {
        ledger.persist(&ledger_path(dir, strategy.kind(), role))?;
    }
    Ok(())
}

/// Loads ledgers written by [`persist_strategy`] and rebuilds derived state.
/// Ledger geometry comes from the files; `config` supplies the rest.
pub fn load_strategy(
    kind: StrategyKind,
    config: &StrategyConfig,
    dir: &Path,
) -> Result<Box<dyn StorageStrategy>, StrategyError> {
    let load = |role| Ledger::load(&ledger_path(dir, kind, role));
    Ok(match kind {
        StrategyKind::PublicDirect => {
            Box::new(PublicDirect::open(config, load(LedgerRole::Public)?))
        }
        StrategyKind::PublicContract => {
            Box::new(PublicContract::open(config, load(LedgerRole::Public)?)?)
        }
        StrategyKind::PrivateBatched => {
            Box::new(PrivateBatched::open(config, load(LedgerRole::Private)?)?)
        }
        StrategyKind::HybridAnchored => Box::new(HybridAnchored::open(
            config,
            load(LedgerRole::Private)?,
            load(LedgerRole::Public)?,
        )?),
    })
}
