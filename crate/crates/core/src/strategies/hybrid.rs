use crate::gas::GasSchedule;
use crate::ledger::{sha256, Ledger};
use crate::rdf::KnowledgeGraph;

use super::anchor::{anchor_batch, append_anchor, AnchorTarget};
use super::encoding::split_batch_payload;
use super::private_batched::PrivateCore;
use super::{
    AnchorMode, LedgerRole, StorageStrategy, StoreReceipt, StrategyConfig, StrategyError,
    StrategyKind, TripleOp,
};

/// Private batches whose digests are anchored on a public ledger.
#[derive(Debug)]
pub struct HybridAnchored {
    core: PrivateCore,
    public: Ledger,
    gas: GasSchedule,
    mode: AnchorMode,
}

impl HybridAnchored {
    pub fn new(config: &StrategyConfig) -> Result<Self, StrategyError> {
        Ok(Self {
            core: PrivateCore::new(config)?,
            public: Ledger::new(config.public_ledger)?,
            gas: config.gas,
            mode: config.anchor_mode,
        })
    }

    pub fn open(
        config: &StrategyConfig,
        private: Ledger,
        public: Ledger,
    ) -> Result<Self, StrategyError> {
        Ok(Self {
            core: PrivateCore::open(config, private)?,
            public,
            gas: config.gas,
            mode: config.anchor_mode,
        })
    }

    pub fn private_ledger(&self) -> &Ledger {
        &self.core.ledger
    }

    pub fn public_ledger(&self) -> &Ledger {
        &self.public
    }

    /// Mutable access for tamper experiments.
    pub fn ledgers_mut(&mut self) -> (&mut Ledger, &mut Ledger) {
        (&mut self.core.ledger, &mut self.public)
    }
}

impl StorageStrategy for HybridAnchored {
    fn kind(&self) -> StrategyKind {
        StrategyKind::HybridAnchored
    }

    fn store(&mut self, ops: &[TripleOp]) -> Result<StoreReceipt, StrategyError> {
        let mut receipt = StoreReceipt::default();
        let batches = self.core.store(ops, &mut receipt)?;
        let submitter = self.core.submitter.clone();
        for (batch, private_tx) in batches {
            let mut anchors = Vec::new();
            match self.mode {
                AnchorMode::PerBatch => {
                    let meta = AnchorTarget {
                        private_tx,
                        op: None,
                    }
                    .metadata(batch.ops.len(), batch.serialized_bytes());
                    anchors.push(anchor_batch(
                        &batch,
                        &mut self.public,
                        &self.gas,
                        &submitter,
                        meta,
                    )?);
                }
                AnchorMode::PerOperation => {
                    let parts = split_batch_payload(&batch.payload)
                        .expect("payload built by batch_triples");
                    for (k, part) in parts.into_iter().enumerate() {
                        let meta = AnchorTarget {
                            private_tx,
                            op: Some(k as u64),
                        }
                        .metadata(1, part.len());
                        anchors.push(append_anchor(
                            &mut self.public,
                            &self.gas,
                            sha256(part),
                            &submitter,
                            meta,
                        )?);
                    }
                }
            }
            for (record, tx) in anchors {
                let stored = self.public.transaction(tx).expect("anchor just appended");
                receipt.add_public(stored.gas_used, record.metadata.len());
                receipt.total_payload_bytes += stored.payload.len() as u64;
                receipt.anchor_tx_indices.push(tx);
                debug_assert_eq!(record.logical_timestamp, stored.logical_timestamp);
            }
        }
        Ok(receipt)
    }

    fn reconstruct(&self) -> Result<KnowledgeGraph, StrategyError> {
        Ok(self.core.state.clone())
    }

    fn ledgers(&self) -> Vec<(LedgerRole, &Ledger)> {
        vec![
            (LedgerRole::Private, &self.core.ledger),
            (LedgerRole::Public, &self.public),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;
    use crate::strategies::AnchorRecord;

    fn inserts(n: usize) -> Vec<TripleOp> {
        (0..n)
            .map(|i| {
                TripleOp::Insert(
                    Triple::iris(&format!("http://s/{i}"), "http://p", "http://o").unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn one_anchor_per_batch_matching_hash() {
        let mut s = HybridAnchored::new(&StrategyConfig::default()).unwrap();
        let r = s.store(&inserts(2500)).unwrap();
        assert_eq!(r.tx_indices.len(), 3);
        assert_eq!(r.anchor_tx_indices.len(), 3);
        for (ptx, atx) in r.tx_indices.iter().zip(&r.anchor_tx_indices) {
            let record =
                AnchorRecord::decode(&s.public.transaction(*atx).unwrap().payload).unwrap();
            let private = s.core.ledger.transaction(*ptx).unwrap();
            assert_eq!(record.hash, sha256(&private.payload));
            assert_eq!(record.target().unwrap().private_tx, *ptx);
        }
        assert_eq!(r.total_gas, r.public_txs.iter().map(|c| c.gas).sum::<u64>());
    }

    #[test]
    fn per_operation_mode() {
        let cfg = StrategyConfig {
            anchor_mode: AnchorMode::PerOperation,
            batch_size: 4,
            ..Default::default()
        };
        let mut s = HybridAnchored::new(&cfg).unwrap();
        let r = s.store(&inserts(10)).unwrap();
        assert_eq!(r.tx_indices.len(), 3);
        assert_eq!(r.anchor_tx_indices.len(), 10);
        let last = AnchorRecord::decode(&s.public.transaction(9).unwrap().payload).unwrap();
        assert_eq!(
            last.target(),
            Some(AnchorTarget {
                private_tx: 2,
                op: Some(1)
            })
        );
    }
}
