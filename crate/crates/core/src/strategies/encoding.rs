//! Wire formats for triple operations.
//!
//! Direct-transaction payloads:
//!
//! ```text
//! INSERT   <canonical line>
//! DELETE   "DELETE:" <canonical line>
//! UPDATE   "UPDATE:" <len(old)> "|" <old line> <len(new)> "|" <new line>
//! ```
//!
//! Lengths are ASCII decimal byte counts without leading zeros. N-Triples
//! lines contain ':' themselves, so the update form frames each line by
//! length instead of splitting on the separator.
//!
//! Batch payloads are `u64 op_count` followed by `u64 len ‖ direct payload`
//! per op, integers little-endian.

use crate::rdf::{canonical_line, parse_ntriples_line, RdfError, Triple};

use super::TripleOp;

pub const DELETE_PREFIX: &str = "DELETE:";
pub const UPDATE_PREFIX: &str = "UPDATE:";

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("payload is not UTF-8")]
    NotUtf8,
    #[error("unknown payload prefix")]
    UnknownPrefix,
    #[error("bad framing: {0}")]
    Framing(String),
    #[error("unparsable triple: {0}")]
    Triple(#[from] RdfError),
    #[error("triple line is not in canonical form")]
    NonCanonical,
}

pub fn encode_direct_op(op: &TripleOp) -> Vec<u8> {
    match op {
        TripleOp::Insert(t) => canonical_line(t).into_bytes(),
        TripleOp::Delete(t) => format!("{DELETE_PREFIX}{}", canonical_line(t)).into_bytes(),
        TripleOp::Update { old, new } => {
            let old = canonical_line(old);
            let new = canonical_line(new);
            format!("{UPDATE_PREFIX}{}|{old}{}|{new}", old.len(), new.len()).into_bytes()
        }
    }
}

pub fn decode_direct_op(payload: &[u8]) -> Result<TripleOp, DecodeError> {
    let text = std::str::from_utf8(payload).map_err(|_| DecodeError::NotUtf8)?;
    if let Some(rest) = text.strip_prefix(DELETE_PREFIX) {
        return Ok(TripleOp::Delete(canonical_triple(rest)?));
    }
    if let Some(rest) = text.strip_prefix(UPDATE_PREFIX) {
        let (old, rest) = framed(rest)?;
        let (new, rest) = framed(rest)?;
        if !rest.is_empty() {
            return Err(DecodeError::Framing("trailing bytes after update".into()));
        }
        return Ok(TripleOp::Update {
            old: canonical_triple(old)?,
            new: canonical_triple(new)?,
        });
    }
    if text.starts_with('<') || text.starts_with("_:") {
        return Ok(TripleOp::Insert(canonical_triple(text)?));
    }
    Err(DecodeError::UnknownPrefix)
}

fn framed(s: &str) -> Result<(&str, &str), DecodeError> {
    let bar = s
        .find('|')
        .ok_or_else(|| DecodeError::Framing("missing length separator".into()))?;
    let digits = &s[..bar];
    let canonical_digits = !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && (digits == "0" || !digits.starts_with('0'));
    if !canonical_digits {
        return Err(DecodeError::Framing(format!("invalid length {digits:?}")));
    }
    let len: usize = digits
        .parse()
        .map_err(|_| DecodeError::Framing(format!("invalid length {digits:?}")))?;
    let body = &s[bar + 1..];
    if len > body.len() || !body.is_char_boundary(len) {
        return Err(DecodeError::Framing("length overruns payload".into()));
    }
    Ok((&body[..len], &body[len..]))
}

fn canonical_triple(line: &str) -> Result<Triple, DecodeError> {
    let t = parse_ntriples_line(line)?;
    if canonical_line(&t) != line {
        return Err(DecodeError::NonCanonical);
    }
    Ok(t)
}

/// Size of a batch payload holding ops whose direct encodings total `op_bytes`.
pub fn batch_payload_len(op_count: usize, op_bytes: usize) -> usize {
    8 + 8 * op_count + op_bytes
}

pub fn encode_batch_payload<'a>(encoded_ops: impl IntoIterator<Item = &'a [u8]>) -> Vec<u8> {
    let ops: Vec<&[u8]> = encoded_ops.into_iter().collect();
    let total: usize = ops.iter().map(|o| o.len()).sum();
    let mut out = Vec::with_capacity(batch_payload_len(ops.len(), total));
    out.extend_from_slice(&(ops.len() as u64).to_le_bytes());
    for op in ops {
        out.extend_from_slice(&(op.len() as u64).to_le_bytes());
        out.extend_from_slice(op);
    }
    out
}

/// Splits a batch payload into the direct encodings of its ops.
pub fn split_batch_payload(payload: &[u8]) -> Result<Vec<&[u8]>, DecodeError> {
    let read_u64 = |at: usize| -> Result<u64, DecodeError> {
        payload
            .get(at..at + 8)
            .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
            .ok_or_else(|| DecodeError::Framing("truncated batch".into()))
    };
    let count = read_u64(0)?;
    if count > (payload.len() as u64) / 8 {
        return Err(DecodeError::Framing(format!(
            "implausible op count {count}"
        )));
    }
    let mut pos = 8usize;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = read_u64(pos)?;
        pos += 8;
        let end = (pos as u64)
            .checked_add(len)
            .filter(|&e| e <= payload.len() as u64)
            .ok_or_else(|| DecodeError::Framing("op overruns batch".into()))?
            as usize;
        out.push(&payload[pos..end]);
        pos = end;
    }
    if pos != payload.len() {
        return Err(DecodeError::Framing("trailing bytes after batch".into()));
    }
    Ok(out)
}

pub fn decode_batch_payload(payload: &[u8]) -> Result<Vec<TripleOp>, DecodeError> {
    split_batch_payload(payload)?
        .into_iter()
        .map(decode_direct_op)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Literal, Term};

    fn abc() -> Triple {
        Triple::iris("http://a", "http://b", "http://c").unwrap()
    }

    #[test]
    fn insert_is_the_line() {
        assert_eq!(
            encode_direct_op(&TripleOp::Insert(abc())),
            b"<http://a> <http://b> <http://c> .".to_vec()
        );
    }

    #[test]
    fn delete_prefix() {
        let enc = encode_direct_op(&TripleOp::Delete(abc()));
        assert!(enc.starts_with(b"DELETE:"));
        assert_eq!(decode_direct_op(&enc).unwrap(), TripleOp::Delete(abc()));
        assert_eq!(
            decode_direct_op(b"DELETE:<http://a> <http://b> <http://c> .").unwrap(),
            TripleOp::Delete(abc())
        );
    }

    #[test]
    fn update_framing() {
        let new = abc().with_object(Term::literal(Literal::simple("a|b:c")));
        let op = TripleOp::Update {
            old: abc(),
            new: new.clone(),
        };
        let enc = String::from_utf8(encode_direct_op(&op)).unwrap();
        assert_eq!(
            enc,
            "UPDATE:34|<http://a> <http://b> <http://c> .31|<http://a> <http://b> \"a|b:c\" ."
        );
        assert_eq!(decode_direct_op(enc.as_bytes()).unwrap(), op);
    }

    #[test]
    fn malformed_payloads() {
        for bad in [
            &b"garbage"[..],
            b"\xff\xfe",
            b"UPDATE:5|<a>",
            b"UPDATE:034|<http://a> <http://b> <http://c> .34|<http://a> <http://b> <http://c> .",
            b"DELETE:<http://a> <http://b>",
            b"<http://a>  <http://b> <http://c> .",
            b"",
        ] {
            assert!(
                decode_direct_op(bad).is_err(),
                "{:?}",
                String::from_utf8_lossy(bad)
            );
        }
    }

    #[test]
    fn batch_round_trip_and_layout() {
        let ops = vec![TripleOp::Insert(abc()), TripleOp::Delete(abc())];
        let encoded: Vec<Vec<u8>> = ops.iter().map(encode_direct_op).collect();
        let payload = encode_batch_payload(encoded.iter().map(|e| e.as_slice()));
        assert_eq!(&payload[..8], &2u64.to_le_bytes());
        assert_eq!(&payload[8..16], &34u64.to_le_bytes());
        assert_eq!(payload.len(), batch_payload_len(2, 34 + 41));
        assert_eq!(decode_batch_payload(&payload).unwrap(), ops);
        assert!(split_batch_payload(&payload[..payload.len() - 1]).is_err());
        let mut extra = payload.clone();
        extra.push(0);
        assert!(split_batch_payload(&extra).is_err());
    }
}
