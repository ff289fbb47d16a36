//! Storage contract simulation.
//!
//! Each op is one contract call. The ledger transaction records what the call
//! leaves on chain, integers little-endian:
//!
//! ```text
//! u64 len ‖ calldata (the direct op encoding)
//! u64 n   ‖ n × topic[32]
//! u64 len ‖ event data (the calldata again)
//! u64 n   ‖ n × (slot key[32] ‖ slot value[32])
//! ```
//!
//! A triple line occupies `ceil(len/32) + 1` slots keyed by
//! `sha256(sha256(line) ‖ u64 i)`: slot 0 holds the length, the rest hold the
//! line in 32-byte words. Deleting writes zeros to the same slots.

use crate::gas::{string_storage_slots, ContractEffects, GasSchedule};
use crate::ledger::{sha256, Digest, Ledger};
use crate::rdf::{canonical_line, KnowledgeGraph, Triple};

use super::encoding::{decode_direct_op, encode_direct_op, DecodeError};
use super::{
    apply_op, check_update_targets, Applied, LedgerRole, StorageStrategy, StoreReceipt,
    StrategyConfig, StrategyError, StrategyKind, TripleOp,
};

pub const CONTRACT_EVENT_TOPICS: u64 = 4;

const EVENT_INSERT: &str = "TripleInserted(bytes32,bytes32,bytes32,bytes)";
const EVENT_DELETE: &str = "TripleDeleted(bytes32,bytes32,bytes32,bytes)";
const EVENT_UPDATE: &str = "TripleUpdated(bytes32,bytes32,bytes32,bytes)";

#[derive(Debug)]
pub struct PublicContract {
    ledger: Ledger,
    state: KnowledgeGraph,
    gas: GasSchedule,
    submitter: String,
}

struct SlotWrite {
    key: Digest,
    value: [u8; 32],
}

fn line_slots(line: &str, clear: bool) -> Vec<SlotWrite> {
    let base = sha256(line.as_bytes());
    let n = string_storage_slots(line.len());
    let key = |i: u64| {
        let mut buf = [0u8; 40];
        buf[..32].copy_from_slice(&base);
        buf[32..].copy_from_slice(&i.to_le_bytes());
        sha256(&buf)
    };
    (0..n)
        .map(|i| {
            let mut value = [0u8; 32];
            if !clear {
                if i == 0 {
                    value[..8].copy_from_slice(&(line.len() as u64).to_le_bytes());
                } else {
                    let start = (i as usize - 1) * 32;
                    let chunk = &line.as_bytes()[start..(start + 32).min(line.len())];
                    value[..chunk.len()].copy_from_slice(chunk);
                }
            }
            SlotWrite { key: key(i), value }
        })
        .collect()
}

fn topics(event: &str, t: &Triple) -> [Digest; CONTRACT_EVENT_TOPICS as usize] {
    [
        sha256(event.as_bytes()),
        sha256(t.subject().canonical().as_bytes()),
        sha256(t.predicate().as_bytes()),
        sha256(t.object().canonical().as_bytes()),
    ]
}

struct Call {
    payload: Vec<u8>,
    calldata_len: usize,
    gas: u64,
}

impl PublicContract {
    pub fn new(config: &StrategyConfig) -> Result<Self, StrategyError> {
        Ok(Self {
            ledger: Ledger::new(config.public_ledger)?,
            state: KnowledgeGraph::new(),
            gas: config.gas,
            submitter: config.submitter.clone(),
        })
    }

    /// Rebuilds the contract state from the calldata of every call.
    pub fn open(config: &StrategyConfig, ledger: Ledger) -> Result<Self, StrategyError> {
        let mut state = KnowledgeGraph::new();
        for tx in ledger.scan() {
            let op =
                decode_call(&tx.payload).map_err(|source| StrategyError::MalformedPayload {
                    tx_index: tx.tx_index,
                    source,
                })?;
            apply_op(&mut state, &op);
        }
        Ok(Self {
            ledger,
            state,
            gas: config.gas,
            submitter: config.submitter.clone(),
        })
    }

    /// Builds the call for `op` against `state`, which must be the state the
    /// call will run on.
    fn build_call(&self, state: &KnowledgeGraph, op: &TripleOp) -> Call {
        let calldata = encode_direct_op(op);
        let mut writes = Vec::new();
        let mut effects = ContractEffects {
            event_topics: CONTRACT_EVENT_TOPICS,
            event_data_bytes: calldata.len() as u64,
            ..Default::default()
        };
        let mut write = |t: &Triple, clear: bool, effects: &mut ContractEffects| {
            let slots = line_slots(&canonical_line(t), clear);
            if clear {
                effects.updated_slots += slots.len() as u64;
            } else {
                effects.new_slots += slots.len() as u64;
            }
            writes.extend(slots);
        };
        let event_topics = match op {
            TripleOp::Insert(t) => {
                if !state.contains(t) {
                    write(t, false, &mut effects);
                }
                topics(EVENT_INSERT, t)
            }
            TripleOp::Delete(t) => {
                if state.contains(t) {
                    write(t, true, &mut effects);
                }
                topics(EVENT_DELETE, t)
            }
            TripleOp::Update { old, new } => {
                if state.contains(old) {
                    write(old, true, &mut effects);
                }
                if old == new || !state.contains(new) {
                    write(new, false, &mut effects);
                }
                topics(EVENT_UPDATE, new)
            }
        };
        let gas = self.gas.contract_store_gas(&calldata, effects);

        let mut payload = Vec::with_capacity(
            32 + 2 * calldata.len() + 32 * event_topics.len() + 64 * writes.len(),
        );
        payload.extend_from_slice(&(calldata.len() as u64).to_le_bytes());
        payload.extend_from_slice(&calldata);
        payload.extend_from_slice(&(event_topics.len() as u64).to_le_bytes());
        for topic in &event_topics {
            payload.extend_from_slice(topic);
        }
        payload.extend_from_slice(&(calldata.len() as u64).to_le_bytes());
        payload.extend_from_slice(&calldata);
        payload.extend_from_slice(&(writes.len() as u64).to_le_bytes());
        for w in &writes {
            payload.extend_from_slice(&w.key);
            payload.extend_from_slice(&w.value);
        }
        Call {
            payload,
            calldata_len: calldata.len(),
            gas,
        }
    }
}

/// Extracts the op from a recorded contract call.
fn decode_call(payload: &[u8]) -> Result<TripleOp, DecodeError> {
    let len = payload
        .get(..8)
        .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
        .ok_or_else(|| DecodeError::Framing("truncated contract call".into()))?;
    let calldata = usize::try_from(len)
        .ok()
        .and_then(|len| payload.get(8..8usize.checked_add(len)?))
        .ok_or_else(|| DecodeError::Framing("calldata overruns call".into()))?;
    decode_direct_op(calldata)
}

/// Remembers the prior presence of every triple `op` touches.
fn record_undo(state: &KnowledgeGraph, op: &TripleOp, undo: &mut Vec<(Triple, bool)>) {
    let mut note = |t: &Triple| undo.push((t.clone(), state.contains(t)));
    match op {
        TripleOp::Insert(t) | TripleOp::Delete(t) => note(t),
        TripleOp::Update { old, new } => {
            note(old);
            note(new);
        }
    }
}

fn rollback(state: &mut KnowledgeGraph, undo: Vec<(Triple, bool)>) {
    for (t, present) in undo.into_iter().rev() {
        if present {
            state.insert(t);
        } else {
            state.remove(&t);
        }
    }
}

impl StorageStrategy for PublicContract {
    fn kind(&self) -> StrategyKind {
        StrategyKind::PublicContract
    }

    fn store(&mut self, ops: &[TripleOp]) -> Result<StoreReceipt, StrategyError> {
        check_update_targets(&self.state, ops)?;
        let limit = self.ledger.config().max_tx_payload_bytes;
        let mut undo = Vec::new();
        let mut calls = Vec::with_capacity(ops.len());
        let mut warnings = 0;
        for op in ops {
            let call = self.build_call(&self.state, op);
            if call.payload.len() as u64 > limit {
                rollback(&mut self.state, undo);
                return Err(StrategyError::OversizeOp {
                    len: call.payload.len() as u64,
                    limit,
                });
            }
            record_undo(&self.state, op, &mut undo);
            if apply_op(&mut self.state, op) == Applied::NoOp {
                warnings += 1;
            }
            calls.push(call);
        }

        let mut receipt = StoreReceipt {
            op_count: ops.len(),
            warnings,
            ..Default::default()
        };
        for call in calls {
            receipt.total_payload_bytes += call.payload.len() as u64;
            let tx = self
                .ledger
                .append_transaction(call.payload, &self.submitter, call.gas)?;
            receipt.tx_indices.push(tx);
            receipt.add_public(call.gas, call.calldata_len);
        }
        Ok(receipt)
    }

    fn reconstruct(&self) -> Result<KnowledgeGraph, StrategyError> {
        Ok(self.state.clone())
    }

    fn ledgers(&self) -> Vec<(LedgerRole, &Ledger)> {
        vec![(LedgerRole::Public, &self.ledger)]
    }
}
