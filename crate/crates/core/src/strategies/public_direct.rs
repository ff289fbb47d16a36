use crate::gas::GasSchedule;
use crate::ledger::Ledger;
use crate::rdf::KnowledgeGraph;

use super::encoding::{decode_direct_op, encode_direct_op};
use super::{
    apply_op, LedgerRole, StorageStrategy, StoreReceipt, StrategyConfig, StrategyError,
    StrategyKind, TripleOp,
};

/// One public transaction per op carrying the encoded op as calldata.
/// There is no state: reading replays the whole chain.
#[derive(Debug)]
pub struct PublicDirect {
    ledger: Ledger,
    gas: GasSchedule,
    submitter: String,
}

impl PublicDirect {
    pub fn new(config: &StrategyConfig) -> Result<Self, StrategyError> {
        Ok(Self::open(config, Ledger::new(config.public_ledger)?))
    }

    pub fn open(config: &StrategyConfig, ledger: Ledger) -> Self {
        Self {
            ledger,
            gas: config.gas,
            submitter: config.submitter.clone(),
        }
    }
}

impl StorageStrategy for PublicDirect {
    fn kind(&self) -> StrategyKind {
        StrategyKind::PublicDirect
    }

    fn store(&mut self, ops: &[TripleOp]) -> Result<StoreReceipt, StrategyError> {
        let limit = self.ledger.config().max_tx_payload_bytes;
        let payloads: Vec<Vec<u8>> = ops.iter().map(encode_direct_op).collect();
        if let Some(p) = payloads.iter().find(|p| p.len() as u64 > limit) {
            return Err(StrategyError::OversizeOp {
                len: p.len() as u64,
                limit,
            });
        }
        let mut receipt = StoreReceipt {
            op_count: ops.len(),
            ..Default::default()
        };
        for payload in payloads {
            let gas = self.gas.direct_tx_gas(&payload);
            let len = payload.len();
            let tx = self
                .ledger
                .append_transaction(payload, &self.submitter, gas)?;
            receipt.tx_indices.push(tx);
            receipt.add_public(gas, len);
            receipt.total_payload_bytes += len as u64;
        }
        Ok(receipt)
    }

    fn reconstruct(&self) -> Result<KnowledgeGraph, StrategyError> {
        let mut g = KnowledgeGraph::new();
        for tx in self.ledger.scan() {
            let op = decode_direct_op(&tx.payload).map_err(|source| {
                StrategyError::MalformedPayload {
                    tx_index: tx.tx_index,
                    source,
                }
            })?;
            apply_op(&mut g, &op);
        }
        Ok(g)
    }

    fn ledgers(&self) -> Vec<(LedgerRole, &Ledger)> {
        vec![(LedgerRole::Public, &self.ledger)]
    }
}
