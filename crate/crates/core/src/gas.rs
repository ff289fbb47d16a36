//! Ethereum-style gas cost model.
//!
//! Gas is modelled, not metered: no EVM executes. Calldata and storage prices
//! follow the post-Istanbul schedule. `contract_overhead` stands for the
//! function-dispatch and bookkeeping cost of the storage contract, whose
//! layout is not public; its default is a calibrated constant, not a derived one.

use serde::{Deserialize, Serialize};

/// Bytes of a SHA-256 digest written by an anchoring transaction.
pub const HASH_BYTES: u64 = 32;

/// Topics on the anchoring `HashStore` event (the event signature).
pub const ANCHOR_EVENT_TOPICS: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GasSchedule {
    pub tx_base: u64,
    pub calldata_nonzero_byte: u64,
    pub calldata_zero_byte: u64,
    pub sstore_new_slot: u64,
    pub sstore_update_slot: u64,
    pub log_base: u64,
    pub log_topic: u64,
    pub log_data_byte: u64,
    /// Calibrated against the reference measurements; see module docs.
    pub contract_overhead: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            tx_base: 21_000,
            calldata_nonzero_byte: 16,
            calldata_zero_byte: 4,
            sstore_new_slot: 20_000,
            sstore_update_slot: 5_000,
            log_base: 375,
            log_topic: 375,
            log_data_byte: 8,
            contract_overhead: 93_600,
        }
    }
}

/// What a contract call writes besides its calldata.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContractEffects {
    pub new_slots: u64,
    pub updated_slots: u64,
    pub event_topics: u64,
    pub event_data_bytes: u64,
}

/// Storage slots a string of `len` bytes occupies: one per 32-byte word plus a length slot.
pub fn string_storage_slots(len: usize) -> u64 {
    (len as u64).div_ceil(32) + 1
}

impl GasSchedule {
    /// Base transaction cost plus calldata.
    pub fn direct_tx_gas(&self, payload: &[u8]) -> u64 {
        let zeros = payload.iter().filter(|&&b| b == 0).count() as u64;
        let nonzeros = payload.len() as u64 - zeros;
        self.tx_base + self.calldata_nonzero_byte * nonzeros + self.calldata_zero_byte * zeros
    }

    pub fn contract_store_gas(&self, payload: &[u8], effects: ContractEffects) -> u64 {
        self.direct_tx_gas(payload)
            + self.contract_overhead
            + self.sstore_new_slot * effects.new_slots
            + self.sstore_update_slot * effects.updated_slots
            + self.log_base
            + self.log_topic * effects.event_topics
            + self.log_data_byte * effects.event_data_bytes
    }

    /// Gas to anchor a batch digest with `metadata`: one new slot for the
    /// digest, one `HashStore` event carrying digest and metadata, calldata of
    /// digest plus metadata. The digest is priced as 32 non-zero bytes, so the
    /// result depends on the metadata alone and never on the anchored batch.
    pub fn anchor_tx_gas(&self, metadata: &str) -> u64 {
        let meta = metadata.as_bytes();
        let zeros = meta.iter().filter(|&&b| b == 0).count() as u64;
        let nonzeros = meta.len() as u64 - zeros;
        let calldata = self.tx_base
            + self.calldata_nonzero_byte * (HASH_BYTES + nonzeros)
            + self.calldata_zero_byte * zeros;
        calldata
            + self.contract_overhead
            + self.sstore_new_slot
            + self.log_base
            + self.log_topic * ANCHOR_EVENT_TOPICS
            + self.log_data_byte * (HASH_BYTES + meta.len() as u64)
    }
}
