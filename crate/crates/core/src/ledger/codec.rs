//! Persisted ledger format. All integers are little-endian.
//!
//! ```text
//! header:
//!   magic            4 bytes  "LGR1"
//!   version          u16      FORMAT_VERSION
//!   block_capacity   u64
//!   max_tx_payload   u64
//!   block_count      u64
//!   header_digest    32 bytes SHA-256 of the 30 bytes above
//! block (repeated block_count times):
//!   record_len       u64      bytes in this record after this field
//!   height           u64
//!   prev_hash        32 bytes
//!   block_hash       32 bytes
//!   logical_ts       u64
//!   sealed           u8       0 or 1
//!   tx_count         u64
//!   transaction (repeated tx_count times):
//!     tx_index       u64
//!     logical_ts     u64
//!     gas_used       u64
//!     submitter_len  u64, submitter bytes (UTF-8)
//!     payload_len    u64, payload bytes
//! ```
//!
//! `block_hash = SHA-256(height ‖ prev_hash ‖ tx_digest* ‖ logical_ts ‖ sealed)`
//! where each `tx_digest` is the SHA-256 of the transaction's fields in the
//! order above, so every persisted byte is covered by either the header digest
//! or the hash chain.

use std::path::Path;

use super::{Digest, Ledger, LedgerBlock, LedgerConfig, LedgerError, LedgerTransaction};

pub const MAGIC: &[u8; 4] = b"LGR1";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: u64 = 4 + 2 + 8 + 8 + 8 + 32;

impl Ledger {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.disk_usage() as usize);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.config.block_capacity.to_le_bytes());
        out.extend_from_slice(&self.config.max_tx_payload_bytes.to_le_bytes());
        out.extend_from_slice(&(self.blocks.len() as u64).to_le_bytes());
        let digest = super::sha256(&out);
        out.extend_from_slice(&digest);
        for block in &self.blocks {
            out.extend_from_slice(&(block.encoded_len() - 8).to_le_bytes());
            out.extend_from_slice(&block.height.to_le_bytes());
            out.extend_from_slice(&block.prev_hash);
            out.extend_from_slice(&block.block_hash);
            out.extend_from_slice(&block.logical_timestamp.to_le_bytes());
            out.push(block.sealed as u8);
            out.extend_from_slice(&(block.transactions.len() as u64).to_le_bytes());
            for tx in &block.transactions {
                out.extend_from_slice(&tx.tx_index.to_le_bytes());
                out.extend_from_slice(&tx.logical_timestamp.to_le_bytes());
                out.extend_from_slice(&tx.gas_used.to_le_bytes());
                out.extend_from_slice(&(tx.submitter.len() as u64).to_le_bytes());
                out.extend_from_slice(tx.submitter.as_bytes());
                out.extend_from_slice(&(tx.payload.len() as u64).to_le_bytes());
                out.extend_from_slice(&tx.payload);
            }
        }
        debug_assert_eq!(out.len() as u64, self.disk_usage());
        out
    }

    /// Decodes a persisted ledger. Fails closed: any structural damage or
    /// chain inconsistency is an error, never a partial ledger.
    pub fn from_bytes(bytes: &[u8]) -> Result<Ledger, LedgerError> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(LedgerError::BadMagic);
        }
        let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
        if version != FORMAT_VERSION {
            return Err(LedgerError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let config = LedgerConfig {
            block_capacity: r.u64()?,
            max_tx_payload_bytes: r.u64()?,
        };
        let block_count = r.u64()?;
        let expected_digest = super::sha256(&bytes[..r.pos]);
        if r.digest()? != expected_digest {
            return Err(LedgerError::Corrupt("header digest mismatch".into()));
        }
        config
            .validate()
            .map_err(|e| LedgerError::Corrupt(e.to_string()))?;

        let mut blocks = Vec::new();
        for expected_height in 0..block_count {
            let record_len = r.u64()?;
            let start = r.pos;
            if record_len > r.remaining() {
                return Err(r.corrupt(format!("block {expected_height} record overruns file")));
            }
            let block = read_block(&mut r)?;
            if (r.pos - start) as u64 != record_len {
                return Err(r.corrupt(format!("block {expected_height} record length mismatch")));
            }
            blocks.push(block);
        }
        if r.remaining() != 0 {
            return Err(r.corrupt(format!("{} trailing bytes after last block", r.remaining())));
        }

        let ledger = Ledger::from_parts(config, blocks);
        let report = ledger.verify_chain();
        if let Some(f) = report.findings.first() {
            return Err(LedgerError::ChainBroken {
                height: f.height,
                detail: format!("{:?}", f.kind),
            });
        }
        Ok(ledger)
    }

    /// Writes the ledger atomically (temp file + rename).
    pub fn persist(&self, path: &Path) -> Result<(), LedgerError> {
        let io = |source| LedgerError::Io {
            path: path.display().to_string(),
            source,
        };
        let tmp = path.with_extension("lgr.tmp");
        std::fs::write(&tmp, self.to_bytes()).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: &Path) -> Result<Ledger, LedgerError> {
        let bytes = std::fs::read(path).map_err(|source| LedgerError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ledger::from_bytes(&bytes)
    }
}

fn read_block(r: &mut Reader<'_>) -> Result<LedgerBlock, LedgerError> {
    let height = r.u64()?;
    let prev_hash = r.digest()?;
    let block_hash = r.digest()?;
    let logical_timestamp = r.u64()?;
    let sealed = match r.take(1)?[0] {
        0 => false,
        1 => true,
        other => return Err(r.corrupt(format!("invalid sealed flag {other}"))),
    };
    let tx_count = r.u64()?;
    // Each transaction needs at least TX_OVERHEAD bytes.
    if tx_count > r.remaining() / super::TX_OVERHEAD {
        return Err(r.corrupt(format!("implausible transaction count {tx_count}")));
    }
    let mut transactions = Vec::with_capacity(tx_count as usize);
    for _ in 0..tx_count {
        let tx_index = r.u64()?;
        let ts = r.u64()?;
        let gas_used = r.u64()?;
        let submitter = r.sized()?;
        let submitter = String::from_utf8(submitter.to_vec())
            .map_err(|_| r.corrupt("submitter is not UTF-8".into()))?;
        let payload = r.sized()?.to_vec();
        transactions.push(LedgerTransaction {
            tx_index,
            payload,
            submitter,
            logical_timestamp: ts,
            gas_used,
        });
    }
    let tx_digests = transactions.iter().map(|t| t.digest()).collect();
    Ok(LedgerBlock {
        height,
        prev_hash,
        block_hash,
        transactions,
        logical_timestamp,
        sealed,
        tx_digests,
    })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> u64 {
        (self.buf.len() - self.pos) as u64
    }

    fn corrupt(&self, msg: String) -> LedgerError {
        LedgerError::Corrupt(format!("{msg} (offset {})", self.pos))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], LedgerError> {
        if (n as u64) > self.remaining() {
            return Err(self.corrupt("truncated file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, LedgerError> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn digest(&mut self) -> Result<Digest, LedgerError> {
        Ok(self.take(32)?.try_into().expect("32 bytes"))
    }

    fn sized(&mut self) -> Result<&'a [u8], LedgerError> {
        let len = self.u64()?;
        if len > self.remaining() {
            return Err(self.corrupt(format!("length {len} overruns file")));
        }
        self.take(len as usize)
    }
}
