//! Public-ledger anchors for private batches (the `HashStore` event).
//!
//! Payload layout, integers little-endian:
//! `hash[32] ‖ u64 len ‖ submitter ‖ u64 logical_timestamp ‖ u64 len ‖ metadata`.
//!
//! Metadata is a `;`-separated `key=value` string. `tx=<n>` names the private
//! transaction; an optional `op=<k>` narrows the anchor to one op of that batch.

use crate::gas::GasSchedule;
use crate::ledger::{Digest, Ledger};

use super::batch::Batch;
use super::encoding::DecodeError;
use super::StrategyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorRecord {
    pub hash: Digest,
    pub submitter: String,
    pub logical_timestamp: u64,
    pub metadata: String,
}

/// What an anchor claims to cover on the private ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnchorTarget {
    pub private_tx: u64,
    pub op: Option<u64>,
}

impl AnchorTarget {
    pub fn metadata(&self, op_count: usize, payload_bytes: usize) -> String {
        match self.op {
            None => format!(
                "ledger=private;tx={};ops={op_count};bytes={payload_bytes}",
                self.private_tx
            ),
            Some(op) => format!("ledger=private;tx={};op={op}", self.private_tx),
        }
    }

    pub fn from_metadata(metadata: &str) -> Option<Self> {
        let mut tx = None;
        let mut op = None;
        for field in metadata.split(';') {
            let (k, v) = field.split_once('=')?;
            match k {
                "tx" => tx = Some(v.parse().ok()?),
                "op" => op = Some(v.parse().ok()?),
                _ => {}
            }
        }
        Some(Self {
            private_tx: tx?,
            op,
        })
    }
}

impl AnchorRecord {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 24 + self.submitter.len() + self.metadata.len());
        out.extend_from_slice(&self.hash);
        out.extend_from_slice(&(self.submitter.len() as u64).to_le_bytes());
        out.extend_from_slice(self.submitter.as_bytes());
        out.extend_from_slice(&self.logical_timestamp.to_le_bytes());
        out.extend_from_slice(&(self.metadata.len() as u64).to_le_bytes());
        out.extend_from_slice(self.metadata.as_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8], DecodeError> {
            let s = bytes
                .get(pos..pos.saturating_add(n))
                .ok_or_else(|| DecodeError::Framing("truncated anchor record".into()))?;
            pos += n;
            Ok(s)
        };
        let hash: Digest = take(32)?.try_into().expect("32 bytes");
        let sub_len = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
        let submitter = std::str::from_utf8(take(sub_len)?)
            .map_err(|_| DecodeError::NotUtf8)?
            .to_string();
        let logical_timestamp = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let meta_len = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
        let metadata = std::str::from_utf8(take(meta_len)?)
            .map_err(|_| DecodeError::NotUtf8)?
            .to_string();
        if pos != bytes.len() {
            return Err(DecodeError::Framing(
                "trailing bytes after anchor record".into(),
            ));
        }
        Ok(Self {
            hash,
            submitter,
            logical_timestamp,
            metadata,
        })
    }

    pub fn target(&self) -> Option<AnchorTarget> {
        AnchorTarget::from_metadata(&self.metadata)
    }
}

/// Appends an anchor for `hash` to the public ledger, charging `anchor_tx_gas`.
pub fn append_anchor(
    public: &mut Ledger,
    schedule: &GasSchedule,
    hash: Digest,
    submitter: &str,
    metadata: String,
) -> Result<(AnchorRecord, u64), StrategyError> {
    if metadata.is_empty() {
        return Err(StrategyError::Config(
            "anchor metadata must not be empty".into(),
        ));
    }
    let record = AnchorRecord {
        hash,
        submitter: submitter.to_string(),
        logical_timestamp: public.next_timestamp(),
        metadata,
    };
    let gas = schedule.anchor_tx_gas(&record.metadata);
    let tx = public.append_transaction(record.encode(), submitter, gas)?;
    Ok((record, tx))
}

/// Anchors one private batch. Returns the record and its public tx index.
pub fn anchor_batch(
    batch: &Batch,
    public: &mut Ledger,
    schedule: &GasSchedule,
    submitter: &str,
    metadata: String,
) -> Result<(AnchorRecord, u64), StrategyError> {
    if batch.ops.is_empty() {
        return Err(StrategyError::EmptyBatch);
    }
    append_anchor(public, schedule, batch.batch_hash, submitter, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::LedgerConfig;
    use crate::rdf::Triple;
    use crate::strategies::{batch_triples, TripleOp};

    fn batch_of(n: usize, tag: &str) -> Batch {
        let ops: Vec<_> = (0..n)
            .map(|i| {
                TripleOp::Insert(
                    Triple::iris(&format!("http://s/{tag}{i}"), "http://p", "http://o").unwrap(),
                )
            })
            .collect();
        batch_triples(&ops, usize::MAX, u64::MAX).unwrap().remove(0)
    }

    #[test]
    fn record_round_trip() {
        let r = AnchorRecord {
            hash: [7; 32],
            submitter: "0xabc".into(),
            logical_timestamp: 42,
            metadata: "ledger=private;tx=3;ops=10;bytes=999".into(),
        };
        assert_eq!(AnchorRecord::decode(&r.encode()).unwrap(), r);
        assert_eq!(
            r.target(),
            Some(AnchorTarget {
                private_tx: 3,
                op: None
            })
        );
        let mut bad = r.encode();
        bad.pop();
        assert!(AnchorRecord::decode(&bad).is_err());
    }

    #[test]
    fn identical_batches_identical_hashes() {
        assert_eq!(batch_of(5, "a").batch_hash, batch_of(5, "a").batch_hash);
        assert_ne!(batch_of(5, "a").batch_hash, batch_of(5, "b").batch_hash);
    }

    #[test]
    fn anchor_gas_independent_of_batch_size() {
        let schedule = GasSchedule::default();
        let mut public = Ledger::new(LedgerConfig::public()).unwrap();
        let meta = |tx| {
            AnchorTarget {
                private_tx: tx,
                op: None,
            }
            .metadata(1000, 100_000)
        };
        let (_, a) =
            anchor_batch(&batch_of(1000, "x"), &mut public, &schedule, "w", meta(1)).unwrap();
        let (_, b) =
            anchor_batch(&batch_of(10, "y"), &mut public, &schedule, "w", meta(2)).unwrap();
        assert_eq!(
            public.transaction(a).unwrap().gas_used,
            public.transaction(b).unwrap().gas_used
        );
    }

    #[test]
    fn empty_batch_rejected() {
        let schedule = GasSchedule::default();
        let mut public = Ledger::new(LedgerConfig::public()).unwrap();
        let empty = Batch {
            ops: vec![],
            payload: vec![],
            batch_hash: [0; 32],
        };
        assert!(matches!(
            anchor_batch(&empty, &mut public, &schedule, "w", "tx=0".into()),
            Err(StrategyError::EmptyBatch)
        ));
    }

    #[test]
    fn metadata_parsing() {
        assert_eq!(
            AnchorTarget::from_metadata("ledger=private;tx=5;op=17"),
            Some(AnchorTarget {
                private_tx: 5,
                op: Some(17)
            })
        );
        assert_eq!(AnchorTarget::from_metadata("ledger=private"), None);
        assert_eq!(AnchorTarget::from_metadata("garbage"), None);
        assert_eq!(AnchorTarget::from_metadata("tx=x"), None);
    }
}
