//! Cross-checks public anchors against the private ledger they cover.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::ledger::{sha256, Ledger};
use crate::strategies::{split_batch_payload, AnchorRecord, AnchorTarget};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch { expected: [u8; 32], found: [u8; 32] },
    Orphan { reason: String },
}

/// Recomputes the digest an anchor claims and compares. `expected` is the
/// anchored digest, `found` the digest of what the private ledger holds now.
pub fn verify_anchor(private: &Ledger, anchor: &AnchorRecord) -> Verdict {
    let Some(target) = anchor.target() else {
        return Verdict::Orphan {
            reason: format!("unresolvable metadata {:?}", anchor.metadata),
        };
    };
    let Some(tx) = private.transaction(target.private_tx) else {
        return Verdict::Orphan {
            reason: format!("no private transaction {}", target.private_tx),
        };
    };
    let found = match target.op {
        None => sha256(&tx.payload),
        Some(k) => match split_batch_payload(&tx.payload) {
            Ok(parts) => match parts.get(k as usize) {
                Some(part) => sha256(part),
                None => {
                    return Verdict::Orphan {
                        reason: format!("private transaction {} has no op {k}", target.private_tx),
                    }
                }
            },
            // The batch no longer frames: whatever is there is not what was anchored.
            Err(_) => sha256(&tx.payload),
        },
    };
    if found == anchor.hash {
        Verdict::Match
    } else {
        Verdict::Mismatch {
            expected: anchor.hash,
            found,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub private_tx: u64,
    pub op: Option<u64>,
    pub anchor_tx: u64,
    #[serde(with = "hex_digest")]
    pub expected: [u8; 32],
    #[serde(with = "hex_digest")]
    pub found: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orphan {
    pub anchor_tx: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Duplicate {
    pub private_tx: u64,
    pub op: Option<u64>,
    pub anchor_txs: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub batches_checked: u64,
    pub matches: u64,
    pub mismatches: Vec<Mismatch>,
    pub orphans: Vec<Orphan>,
    /// Private transactions no anchor covers.
    pub unanchored: Vec<u64>,
    pub duplicates: Vec<Duplicate>,
}

mod hex_digest {
    pub fn serialize<S: serde::Serializer>(d: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(d))
    }
}

impl AuditReport {
    pub fn finding_count(&self) -> usize {
        self.mismatches.len() + self.orphans.len() + self.unanchored.len() + self.duplicates.len()
    }

    pub fn is_clean(&self) -> bool {
        self.finding_count() == 0
    }

    /// Private transactions with at least one mismatching anchor, ascending.
    pub fn tampered_private_txs(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.mismatches.iter().map(|m| m.private_tx).collect();
        v.dedup();
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "audit: {} checked, {} match, {} mismatch, {} orphan, {} unanchored, {} duplicate",
            self.batches_checked,
            self.matches,
            self.mismatches.len(),
            self.orphans.len(),
            self.unanchored.len(),
            self.duplicates.len()
        );
        for m in &self.mismatches {
            let op = m.op.map(|k| format!(" op {k}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "MISMATCH private tx {}{op} anchored by public tx {}: expected {} found {}",
                m.private_tx,
                m.anchor_tx,
                hex::encode(m.expected),
                hex::encode(m.found)
            );
        }
        for o in &self.orphans {
            let _ = writeln!(out, "ORPHAN public tx {}: {}", o.anchor_tx, o.reason);
        }
        for u in &self.unanchored {
            let _ = writeln!(out, "UNANCHORED private tx {u}");
        }
        for d in &self.duplicates {
            let op = d.op.map(|k| format!(" op {k}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "DUPLICATE private tx {}{op} anchored by public txs {:?}",
                d.private_tx, d.anchor_txs
            );
        }
        out
    }

    /// One JSON object per finding, then a summary line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let mut line = |v: serde_json::Value| {
            out.push_str(&v.to_string());
            out.push('\n');
        };
        for m in &self.mismatches {
            let mut v = serde_json::to_value(m).expect("serializable");
            v["finding"] = "mismatch".into();
            line(v);
        }
        for o in &self.orphans {
            let mut v = serde_json::to_value(o).expect("serializable");
            v["finding"] = "orphan".into();
            line(v);
        }
        for u in &self.unanchored {
            line(serde_json::json!({"finding": "unanchored", "private_tx": u}));
        }
        for d in &self.duplicates {
            let mut v = serde_json::to_value(d).expect("serializable");
            v["finding"] = "duplicate".into();
            line(v);
        }
        line(serde_json::json!({
            "summary": true,
            "batches_checked": self.batches_checked,
            "matches": self.matches,
            "mismatches": self.mismatches.len(),
            "orphans": self.orphans.len(),
            "unanchored": self.unanchored.len(),
            "duplicates": self.duplicates.len(),
        }));
        out
    }
}

/// Verifies every anchor on `public` and checks that each private transaction
/// is anchored exactly once. A private transaction counts as anchored when a
/// whole-batch anchor or at least one per-op anchor names it.
pub fn audit_all(private: &Ledger, public: &Ledger) -> AuditReport {
    let mut report = AuditReport::default();
    let mut seen: BTreeMap<AnchorTarget, Vec<u64>> = BTreeMap::new();
    for tx in public.scan() {
        let record = match AnchorRecord::decode(&tx.payload) {
            Ok(r) => r,
            Err(e) => {
                report.orphans.push(Orphan {
                    anchor_tx: tx.tx_index,
                    reason: format!("undecodable anchor: {e}"),
                });
                continue;
            }
        };
        match verify_anchor(private, &record) {
            Verdict::Orphan { reason } => report.orphans.push(Orphan {
                anchor_tx: tx.tx_index,
                reason,
            }),
            verdict => {
                let target = record.target().expect("resolved by verify_anchor");
                report.batches_checked += 1;
                seen.entry(target).or_default().push(tx.tx_index);
                match verdict {
                    Verdict::Match => report.matches += 1,
                    Verdict::Mismatch { expected, found } => report.mismatches.push(Mismatch {
                        private_tx: target.private_tx,
                        op: target.op,
                        anchor_tx: tx.tx_index,
                        expected,
                        found,
                    }),
                    Verdict::Orphan { .. } => unreachable!(),
                }
            }
        }
    }
    report
        .mismatches
        .sort_by_key(|m| (m.private_tx, m.op, m.anchor_tx));
    for (target, anchors) in &seen {
        if anchors.len() > 1 {
            report.duplicates.push(Duplicate {
                private_tx: target.private_tx,
                op: target.op,
                anchor_txs: anchors.clone(),
            });
        }
    }
    let anchored: std::collections::HashSet<u64> = seen.keys().map(|t| t.private_tx).collect();
    report.unanchored = (0..private.tx_count())
        .filter(|i| !anchored.contains(i))
        .collect();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;
    use crate::strategies::{HybridAnchored, StorageStrategy, StrategyConfig, TripleOp};

    fn hybrid(n: usize) -> HybridAnchored {
        let mut s = HybridAnchored::new(&StrategyConfig {
            batch_size: 10,
            ..Default::default()
        })
        .unwrap();
        let ops: Vec<_> = (0..n)
            .map(|i| {
                TripleOp::Insert(
                    Triple::iris(&format!("http://s/{i}"), "http://p", "http://o").unwrap(),
                )
            })
            .collect();
        s.store(&ops).unwrap();
        s
    }

    #[test]
    fn fresh_run_is_clean() {
        let s = hybrid(30);
        let r = audit_all(s.private_ledger(), s.public_ledger());
        assert_eq!((r.batches_checked, r.matches), (3, 3));
        assert!(r.is_clean());
    }

    #[test]
    fn tamper_reports_one_mismatch() {
        let mut s = hybrid(30);
        s.ledgers_mut().0.corrupt_payload_byte(1, 20, 0x01).unwrap();
        let r = audit_all(s.private_ledger(), s.public_ledger());
        assert_eq!(r.tampered_private_txs(), vec![1]);
        assert_eq!(r.batches_checked, r.matches + r.mismatches.len() as u64);
        assert_ne!(r.mismatches[0].expected, r.mismatches[0].found);
    }

    #[test]
    fn rewritten_history_passes_chain_check_but_not_audit() {
        let mut s = hybrid(30);
        let (private, _) = s.ledgers_mut();
        let mut payload = private.transaction(2).unwrap().payload.clone();
        payload[20] ^= 0x01;
        private.rewrite_history(2, payload).unwrap();
        assert!(s.private_ledger().verify_chain().is_intact());
        let r = audit_all(s.private_ledger(), s.public_ledger());
        assert_eq!(r.tampered_private_txs(), vec![2]);
    }

    #[test]
    fn orphan_unanchored_and_duplicate() {
        let s = hybrid(20);
        let mut public = Ledger::new(*s.public_ledger().config()).unwrap();
        let tx0 = s.public_ledger().transaction(0).unwrap();
        public
            .append_transaction(tx0.payload.clone(), "w", 0)
            .unwrap();
        public
            .append_transaction(tx0.payload.clone(), "w", 0)
            .unwrap();
        let stray = AnchorRecord {
            hash: [0; 32],
            submitter: "w".into(),
            logical_timestamp: 0,
            metadata: "ledger=private;tx=99".into(),
        };
        public.append_transaction(stray.encode(), "w", 0).unwrap();
        public.append_transaction(b"junk".to_vec(), "w", 0).unwrap();
        let r = audit_all(s.private_ledger(), &public);
        assert_eq!(r.unanchored, vec![1]);
        assert_eq!(r.orphans.len(), 2);
        assert_eq!(r.duplicates.len(), 1);
        assert_eq!(r.duplicates[0].anchor_txs, vec![0, 1]);
        assert_eq!(r.to_json_lines().lines().count(), r.finding_count() + 1);
    }
}
