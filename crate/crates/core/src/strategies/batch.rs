use crate::ledger::{sha256, Digest};

use super::encoding::{batch_payload_len, encode_batch_payload, encode_direct_op};
use super::{StrategyError, TripleOp};

/// A group of ops stored as one private-ledger transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub ops: Vec<TripleOp>,
    /// Payload bytes exactly as stored on the ledger.
    pub payload: Vec<u8>,
    /// SHA-256 of `payload`.
    pub batch_hash: Digest,
}

impl Batch {
    fn from_encoded(ops: Vec<TripleOp>, encoded: &[Vec<u8>]) -> Self {
        let payload = encode_batch_payload(encoded.iter().map(|e| e.as_slice()));
        let batch_hash = sha256(&payload);
        Self {
            ops,
            payload,
            batch_hash,
        }
    }

    pub fn serialized_bytes(&self) -> usize {
        self.payload.len()
    }
}

/// Order-preserving greedy partition of `ops`: a batch closes only when the
/// next op would exceed `batch_size` ops or `max_bytes` of payload.
pub fn batch_triples(
    ops: &[TripleOp],
    batch_size: usize,
    max_bytes: u64,
) -> Result<Vec<Batch>, StrategyError> {
    if batch_size == 0 {
        return Err(StrategyError::Config(
            "batch size must be at least 1".into(),
        ));
    }
    let mut batches = Vec::new();
    let mut cur_ops: Vec<TripleOp> = Vec::new();
    let mut cur_enc: Vec<Vec<u8>> = Vec::new();
    let mut cur_bytes = 0usize;
    for op in ops {
        let enc = encode_direct_op(op);
        let alone = batch_payload_len(1, enc.len()) as u64;
        if alone > max_bytes {
            return Err(StrategyError::OversizeOp {
                len: alone,
                limit: max_bytes,
            });
        }
        let grown = batch_payload_len(cur_ops.len() + 1, cur_bytes + enc.len()) as u64;
        if !cur_ops.is_empty() && (cur_ops.len() == batch_size || grown > max_bytes) {
            batches.push(Batch::from_encoded(std::mem::take(&mut cur_ops), &cur_enc));
            cur_enc.clear();
            cur_bytes = 0;
        }
        cur_bytes += enc.len();
        cur_enc.push(enc);
        cur_ops.push(op.clone());
    }
    if !cur_ops.is_empty() {
        batches.push(Batch::from_encoded(cur_ops, &cur_enc));
    }
    Ok(batches)
}
