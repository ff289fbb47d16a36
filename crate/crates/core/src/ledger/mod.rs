//! Append-only, hash-chained ledger shared by every storage strategy.
//!
//! A ledger is a list of blocks. Each block holds up to `block_capacity`
//! transactions and is sealed once full (or when [`Ledger::seal`] is called).
//! Block hashes chain through `prev_hash`; block 0 links to the all-zero
//! genesis digest. Timestamps are logical: a counter advanced by every append.
//!
//! The persisted layout is described in [`codec`]; [`Ledger::disk_usage`]
//! always equals the length of that serialization.

pub mod codec;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

pub use codec::{FORMAT_VERSION, HEADER_LEN, MAGIC};

pub type Digest = [u8; 32];

pub const GENESIS_HASH: Digest = [0u8; 32];

/// Serialized bytes per block besides its transactions.
pub(crate) const BLOCK_OVERHEAD: u64 = 8 + 8 + 32 + 32 + 8 + 1 + 8;
/// Serialized bytes per transaction besides submitter and payload.
pub(crate) const TX_OVERHEAD: u64 = 8 * 5;

pub fn sha256(bytes: &[u8]) -> Digest {
    Sha256::digest(bytes).into()
}

#[derive(Debug, thiserror::Error)]
pub enum LedgerError {
    #[error("payload of {len} bytes exceeds the {limit}-byte transaction limit")]
    OversizePayload { len: u64, limit: u64 },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a ledger file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported ledger format version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("corrupt ledger file: {0}")]
    Corrupt(String),
    #[error("ledger chain broken at block height {height}: {detail}")]
    ChainBroken { height: u64, detail: String },
    #[error("no transaction with index {0}")]
    NoSuchTransaction(u64),
    #[error("invalid ledger configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerConfig {
    pub block_capacity: u64,
    pub max_tx_payload_bytes: u64,
}

impl LedgerConfig {
    /// 49 MiB, the default maximum transaction size of the permissioned ledger.
    pub const PRIVATE_MAX_TX_BYTES: u64 = 49 * 1024 * 1024;
    /// 128 KiB, the usual public-chain transaction size limit.
    pub const PUBLIC_MAX_TX_BYTES: u64 = 128 * 1024;

    /// Public-chain profile: many small transactions per block.
    pub fn public() -> Self {
        Self {
            block_capacity: 100,
            max_tx_payload_bytes: Self::PUBLIC_MAX_TX_BYTES,
        }
    }

    /// Permissioned-chain profile: few large transactions per block.
    pub fn private() -> Self {
        Self {
            block_capacity: 10,
            max_tx_payload_bytes: Self::PRIVATE_MAX_TX_BYTES,
        }
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        if self.block_capacity == 0 {
            return Err(LedgerError::Config(
                "block_capacity must be positive".into(),
            ));
        }
        if self.max_tx_payload_bytes == 0 {
            return Err(LedgerError::Config(
                "max_tx_payload_bytes must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerTransaction {
    pub tx_index: u64,
    pub payload: Vec<u8>,
    pub submitter: String,
    pub logical_timestamp: u64,
    pub gas_used: u64,
}

impl LedgerTransaction {
    /// Digest over every field of the transaction as serialized.
    pub fn digest(&self) -> Digest {
        let mut h = Sha256::new();
        h.update(self.tx_index.to_le_bytes());
        h.update(self.logical_timestamp.to_le_bytes());
        h.update(self.gas_used.to_le_bytes());
        h.update((self.submitter.len() as u64).to_le_bytes());
        h.update(self.submitter.as_bytes());
        h.update((self.payload.len() as u64).to_le_bytes());
        h.update(&self.payload);
        h.finalize().into()
    }

    pub(crate) fn encoded_len(&self) -> u64 {
        TX_OVERHEAD + self.submitter.len() as u64 + self.payload.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerBlock {
    height: u64,
    prev_hash: Digest,
    block_hash: Digest,
    transactions: Vec<LedgerTransaction>,
    logical_timestamp: u64,
    sealed: bool,
    /// Cached transaction digests; recomputed from scratch by verification.
    tx_digests: Vec<Digest>,
}

impl LedgerBlock {
    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn prev_hash(&self) -> &Digest {
        &self.prev_hash
    }

    pub fn block_hash(&self) -> &Digest {
        &self.block_hash
    }

    pub fn transactions(&self) -> &[LedgerTransaction] {
        &self.transactions
    }

    pub fn logical_timestamp(&self) -> u64 {
        self.logical_timestamp
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    fn compute_hash<'a>(
        height: u64,
        prev_hash: &Digest,
        digests: impl IntoIterator<Item = &'a Digest>,
        logical_timestamp: u64,
        sealed: bool,
    ) -> Digest {
        let mut h = Sha256::new();
        h.update(height.to_le_bytes());
        h.update(prev_hash);
        for d in digests {
            h.update(d);
        }
        h.update(logical_timestamp.to_le_bytes());
        h.update([sealed as u8]);
        h.finalize().into()
    }

    fn rehash(&mut self) {
        self.block_hash = Self::compute_hash(
            self.height,
            &self.prev_hash,
            &self.tx_digests,
            self.logical_timestamp,
            self.sealed,
        );
    }

    /// Hash recomputed from the transactions themselves, ignoring caches.
    pub fn recompute_hash(&self) -> Digest {
        let digests: Vec<Digest> = self.transactions.iter().map(|t| t.digest()).collect();
        Self::compute_hash(
            self.height,
            &self.prev_hash,
            &digests,
            self.logical_timestamp,
            self.sealed,
        )
    }

    pub(crate) fn encoded_len(&self) -> u64 {
        BLOCK_OVERHEAD
            + self
                .transactions
                .iter()
                .map(|t| t.encoded_len())
                .sum::<u64>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ledger {
    config: LedgerConfig,
    blocks: Vec<LedgerBlock>,
    tx_count: u64,
    clock: u64,
    disk_bytes: u64,
}

impl Ledger {
    pub fn new(config: LedgerConfig) -> Result<Self, LedgerError> {
        config.validate()?;
        Ok(Self {
            config,
            blocks: Vec::new(),
            tx_count: 0,
            clock: 0,
            disk_bytes: HEADER_LEN,
        })
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn blocks(&self) -> &[LedgerBlock] {
        &self.blocks
    }

    pub fn tx_count(&self) -> u64 {
        self.tx_count
    }

    /// Timestamp the next appended transaction will carry.
    pub fn next_timestamp(&self) -> u64 {
        self.clock
    }

    pub fn append_transaction(
        &mut self,
        payload: Vec<u8>,
        submitter: &str,
        gas_used: u64,
    ) -> Result<u64, LedgerError> {
        let len = payload.len() as u64;
        if len > self.config.max_tx_payload_bytes {
            return Err(LedgerError::OversizePayload {
                len,
                limit: self.config.max_tx_payload_bytes,
            });
        }
        if self.blocks.last().is_none_or(|b| b.sealed) {
            let prev_hash = self.blocks.last().map_or(GENESIS_HASH, |b| b.block_hash);
            self.blocks.push(LedgerBlock {
                height: self.blocks.len() as u64,
                prev_hash,
                block_hash: GENESIS_HASH,
                transactions: Vec::new(),
                logical_timestamp: self.clock,
                sealed: false,
                tx_digests: Vec::new(),
            });
            self.disk_bytes += BLOCK_OVERHEAD;
        }
        let tx = LedgerTransaction {
            tx_index: self.tx_count,
            payload,
            submitter: submitter.to_string(),
            logical_timestamp: self.clock,
            gas_used,
        };
        self.disk_bytes += tx.encoded_len();
        let capacity = self.config.block_capacity;
        let block = self.blocks.last_mut().expect("open block exists");
        block.tx_digests.push(tx.digest());
        block.transactions.push(tx);
        if block.transactions.len() as u64 >= capacity {
            block.sealed = true;
        }
        block.rehash();
        self.tx_count += 1;
        self.clock += 1;
        Ok(self.tx_count - 1)
    }

    /// Seals the open block, if there is one.
    pub fn seal(&mut self) {
        if let Some(block) = self.blocks.last_mut() {
            if !block.sealed {
                block.sealed = true;
                block.rehash();
            }
        }
    }

    /// All transactions in index order.
    pub fn scan(&self) -> impl Iterator<Item = &LedgerTransaction> + '_ {
        self.blocks.iter().flat_map(|b| b.transactions.iter())
    }

    pub fn transaction(&self, tx_index: u64) -> Option<&LedgerTransaction> {
        let (b, i) = self.locate(tx_index)?;
        Some(&self.blocks[b].transactions[i])
    }

    fn locate(&self, tx_index: u64) -> Option<(usize, usize)> {
        if tx_index >= self.tx_count {
            return None;
        }
        let b = self
            .blocks
            .partition_point(|blk| {
                blk.transactions
                    .first()
                    .is_none_or(|t| t.tx_index <= tx_index)
            })
            .checked_sub(1)?;
        let first = self.blocks[b].transactions.first()?.tx_index;
        let i = (tx_index - first) as usize;
        (i < self.blocks[b].transactions.len()).then_some((b, i))
    }

    /// Byte length of the persisted form of this ledger.
    pub fn disk_usage(&self) -> u64 {
        self.disk_bytes
    }

    pub fn verify_chain(&self) -> ChainReport {
        let mut findings = Vec::new();
        let mut expected_prev = GENESIS_HASH;
        let mut expected_index = 0u64;
        let mut last_ts: Option<u64> = None;
        let last_height = self.blocks.len().saturating_sub(1) as u64;
        for (i, block) in self.blocks.iter().enumerate() {
            let height = i as u64;
            let mut note = |kind: FindingKind| findings.push(ChainFinding { height, kind });
            if block.height != height {
                note(FindingKind::HeightMismatch {
                    found: block.height,
                });
            }
            if block.prev_hash != expected_prev {
                note(FindingKind::BrokenLink);
            }
            if block.recompute_hash() != block.block_hash {
                note(FindingKind::BlockHashMismatch);
            }
            let len = block.transactions.len() as u64;
            if len == 0 {
                note(FindingKind::EmptyBlock);
            }
            if len > self.config.block_capacity {
                note(FindingKind::OverfullBlock { tx_count: len });
            }
            if !block.sealed && (height != last_height || len >= self.config.block_capacity) {
                note(FindingKind::UnsealedBlock);
            }
            for tx in &block.transactions {
                if tx.tx_index != expected_index {
                    note(FindingKind::TxIndexGap {
                        expected: expected_index,
                        found: tx.tx_index,
                    });
                }
                expected_index = tx.tx_index + 1;
                if last_ts.is_some_and(|prev| tx.logical_timestamp < prev) {
                    note(FindingKind::TimestampRegression {
                        tx_index: tx.tx_index,
                    });
                }
                last_ts = Some(tx.logical_timestamp);
                if tx.payload.len() as u64 > self.config.max_tx_payload_bytes {
                    note(FindingKind::OversizePayload {
                        tx_index: tx.tx_index,
                    });
                }
            }
            expected_prev = block.block_hash;
        }
        ChainReport { findings }
    }

    /// Flips bits of one payload byte without touching any hash, modelling
    /// tampering with stored data.
    pub fn corrupt_payload_byte(
        &mut self,
        tx_index: u64,
        offset: usize,
        xor_mask: u8,
    ) -> Result<(), LedgerError> {
        let (b, i) = self
            .locate(tx_index)
            .ok_or(LedgerError::NoSuchTransaction(tx_index))?;
        let payload = &mut self.blocks[b].transactions[i].payload;
        let len = payload.len();
        let byte = payload.get_mut(offset).ok_or_else(|| {
            LedgerError::Corrupt(format!("offset {offset} beyond payload of {len} bytes"))
        })?;
        *byte ^= xor_mask;
        Ok(())
    }

    /// Replaces a payload and recomputes every hash from its block onward.
    /// The result passes [`Ledger::verify_chain`]; this models an operator
    /// rewriting its own history.
    pub fn rewrite_history(&mut self, tx_index: u64, payload: Vec<u8>) -> Result<(), LedgerError> {
        let (b, i) = self
            .locate(tx_index)
            .ok_or(LedgerError::NoSuchTransaction(tx_index))?;
        let tx = &mut self.blocks[b].transactions[i];
        self.disk_bytes = self.disk_bytes - tx.payload.len() as u64 + payload.len() as u64;
        tx.payload = payload;
        self.blocks[b].tx_digests[i] = self.blocks[b].transactions[i].digest();
        for h in b..self.blocks.len() {
            if h > 0 {
                self.blocks[h].prev_hash = self.blocks[h - 1].block_hash;
            }
            self.blocks[h].rehash();
        }
        Ok(())
    }

    /// Overwrites the block at `height` with a foreign block, hashes untouched.
    pub fn replace_block(&mut self, height: u64, block: LedgerBlock) -> Result<(), LedgerError> {
        let slot = self
            .blocks
            .get_mut(height as usize)
            .ok_or_else(|| LedgerError::Corrupt(format!("no block at height {height}")))?;
        self.disk_bytes = self.disk_bytes - slot.encoded_len() + block.encoded_len();
        *slot = block;
        Ok(())
    }

    pub(crate) fn from_parts(config: LedgerConfig, blocks: Vec<LedgerBlock>) -> Self {
        let tx_count = blocks.iter().map(|b| b.transactions.len() as u64).sum();
        let clock = blocks
            .last()
            .and_then(|b| b.transactions.last())
            .map_or(0, |t| t.logical_timestamp + 1);
        let disk_bytes = HEADER_LEN + blocks.iter().map(|b| b.encoded_len()).sum::<u64>();
        Self {
            config,
            blocks,
            tx_count,
            clock,
            disk_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindingKind {
    HeightMismatch { found: u64 },
    BrokenLink,
    BlockHashMismatch,
    EmptyBlock,
    OverfullBlock { tx_count: u64 },
    UnsealedBlock,
    TxIndexGap { expected: u64, found: u64 },
    TimestampRegression { tx_index: u64 },
    OversizePayload { tx_index: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFinding {
    pub height: u64,
    pub kind: FindingKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainReport {
    pub findings: Vec<ChainFinding>,
}

impl ChainReport {
    pub fn is_intact(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn first_inconsistent_height(&self) -> Option<u64> {
        self.findings.iter().map(|f| f.height).min()
    }
}
