use crate::ledger::Ledger;
use crate::rdf::KnowledgeGraph;

use super::batch::{batch_triples, Batch};
use super::encoding::decode_batch_payload;
use super::{
    apply_op, check_update_targets, Applied, LedgerRole, StorageStrategy, StoreReceipt,
    StrategyConfig, StrategyError, StrategyKind, TripleOp,
};

/// Batched private ledger plus its world-state map. Shared by the private and
/// hybrid strategies.
#[derive(Debug)]
pub(crate) struct PrivateCore {
    pub(crate) ledger: Ledger,
    pub(crate) state: KnowledgeGraph,
    batch_size: usize,
    pub(crate) submitter: String,
}

impl PrivateCore {
    pub(crate) fn new(config: &StrategyConfig) -> Result<Self, StrategyError> {
        Self::open(config, Ledger::new(config.private_ledger)?)
    }

    pub(crate) fn open(config: &StrategyConfig, ledger: Ledger) -> Result<Self, StrategyError> {
        if config.batch_size == 0 {
            return Err(StrategyError::Config(
                "batch size must be at least 1".into(),
            ));
        }
        let mut state = KnowledgeGraph::new();
        for tx in ledger.scan() {
            let ops = decode_batch_payload(&tx.payload).map_err(|source| {
                StrategyError::MalformedPayload {
                    tx_index: tx.tx_index,
                    source,
                }
            })?;
            for op in &ops {
                apply_op(&mut state, op);
            }
        }
        Ok(Self {
            ledger,
            state,
            batch_size: config.batch_size,
            submitter: config.submitter.clone(),
        })
    }

    /// Validates, batches and commits `ops`. Returns each batch with its
    /// private tx index. Nothing is written when validation fails.
    pub(crate) fn store(
        &mut self,
        ops: &[TripleOp],
        receipt: &mut StoreReceipt,
    ) -> Result<Vec<(Batch, u64)>, StrategyError> {
        check_update_targets(&self.state, ops)?;
        let batches = batch_triples(
            ops,
            self.batch_size,
            self.ledger.config().max_tx_payload_bytes,
        )?;
        let mut out = Vec::with_capacity(batches.len());
        for batch in batches {
            let tx = self
                .ledger
                .append_transaction(batch.payload.clone(), &self.submitter, 0)?;
            receipt.tx_indices.push(tx);
            receipt.total_payload_bytes += batch.payload.len() as u64;
            for op in &batch.ops {
                if apply_op(&mut self.state, op) == Applied::NoOp {
                    receipt.warnings += 1;
                }
            }
            out.push((batch, tx));
        }
        receipt.op_count += ops.len();
        Ok(out)
    }
}

/// One private transaction per batch, no gas. Reads come from the world state.
#[derive(Debug)]
pub struct PrivateBatched {
    core: PrivateCore,
}

impl PrivateBatched {
    pub fn new(config: &StrategyConfig) -> Result<Self, StrategyError> {
        Ok(Self {
            core: PrivateCore::new(config)?,
        })
    }

    pub fn open(config: &StrategyConfig, ledger: Ledger) -> Result<Self, StrategyError> {
        Ok(Self {
            core: PrivateCore::open(config, ledger)?,
        })
    }
}

impl StorageStrategy for PrivateBatched {
    fn kind(&self) -> StrategyKind {
        StrategyKind::PrivateBatched
    }

    fn store(&mut self, ops: &[TripleOp]) -> Result<StoreReceipt, StrategyError> {
        let mut receipt = StoreReceipt::default();
        self.core.store(ops, &mut receipt)?;
        Ok(receipt)
    }

    fn reconstruct(&self) -> Result<KnowledgeGraph, StrategyError> {
        Ok(self.core.state.clone())
    }

    fn ledgers(&self) -> Vec<(LedgerRole, &Ledger)> {
        vec![(LedgerRole::Private, &self.core.ledger)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    fn t(i: usize) -> Triple {
        Triple::iris(&format!("http://s/{i}"), "http://p", "http://o").unwrap()
    }

    #[test]
    fn ceiling_batches_and_no_gas() {
        let mut s = PrivateBatched::new(&StrategyConfig::default()).unwrap();
        let ops: Vec<_> = (0..2500).map(|i| TripleOp::Insert(t(i))).collect();
        let r = s.store(&ops).unwrap();
        assert_eq!(r.tx_indices.len(), 3);
        assert_eq!(r.total_gas, 0);
        assert!(r.public_txs.is_empty());
        assert_eq!(r.op_count, 2500);
        assert_eq!(s.reconstruct().unwrap().len(), 2500);
    }

    #[test]
    fn update_is_remove_then_insert() {
        let mut s = PrivateBatched::new(&StrategyConfig::default()).unwrap();
        s.store(&[TripleOp::Insert(t(1))]).unwrap();
        s.store(&[TripleOp::Update {
            old: t(1),
            new: t(2),
        }])
        .unwrap();
        let g = s.reconstruct().unwrap();
        assert!(!g.contains(&t(1)) && g.contains(&t(2)));
    }

    #[test]
    fn failed_store_writes_nothing() {
        let mut s = PrivateBatched::new(&StrategyConfig::default()).unwrap();
        let ops = [
            TripleOp::Insert(t(1)),
            TripleOp::Update {
                old: t(9),
                new: t(2),
            },
        ];
        assert!(s.store(&ops).is_err());
        assert_eq!(s.core.ledger.tx_count(), 0);
        assert!(s.reconstruct().unwrap().is_empty());
    }

    #[test]
    fn duplicate_insert_and_absent_delete_warn() {
        let mut s = PrivateBatched::new(&StrategyConfig::default()).unwrap();
        let r = s
            .store(&[
                TripleOp::Insert(t(1)),
                TripleOp::Insert(t(1)),
                TripleOp::Delete(t(5)),
            ])
            .unwrap();
        assert_eq!(r.warnings, 2);
        assert_eq!(s.core.ledger.tx_count(), 1);
    }

    #[test]
    fn open_replays_batches() {
        let cfg = StrategyConfig {
            batch_size: 3,
            ..Default::default()
        };
        let mut s = PrivateBatched::new(&cfg).unwrap();
        let ops: Vec<_> = (0..10).map(|i| TripleOp::Insert(t(i))).collect();
        s.store(&ops).unwrap();
        s.store(&[TripleOp::Delete(t(4))]).unwrap();
        let reopened = PrivateBatched::open(&cfg, s.core.ledger.clone()).unwrap();
        assert_eq!(reopened.reconstruct().unwrap(), s.reconstruct().unwrap());
    }
}
