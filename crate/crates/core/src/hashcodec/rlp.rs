//! Recursive Length Prefix codec.
//!
//! The decoder is strict: it accepts only the canonical encoding of an item,
//! so every item has exactly one accepted byte representation. Trie proofs
//! rely on that uniqueness.

use ethnum::U256;
use thiserror::Error;

/// Nesting bound for decoding; real headers, accounts and trie nodes nest at
/// most three levels.
const MAX_DEPTH: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum RlpItem {
    Bytes(Vec<u8>),
    List(Vec<RlpItem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RlpError {
    #[error("malformed RLP: empty input")]
    Empty,
    #[error("malformed RLP: truncated input")]
    Truncated,
    #[error("malformed RLP: {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("malformed RLP: non-canonical {0}")]
    NonCanonical(&'static str),
    #[error("malformed RLP: nesting deeper than {MAX_DEPTH}")]
    TooDeep,
    #[error("malformed RLP: expected {0}")]
    Unexpected(&'static str),
}

impl RlpItem {
    pub fn bytes(b: impl Into<Vec<u8>>) -> Self {
        RlpItem::Bytes(b.into())
    }

    pub fn u64(v: u64) -> Self {
        RlpItem::Bytes(trim_leading_zeros(&v.to_be_bytes()).to_vec())
    }

    pub fn u256(v: U256) -> Self {
        RlpItem::Bytes(trim_leading_zeros(&v.to_be_bytes()).to_vec())
    }

    pub fn as_bytes(&self) -> Result<&[u8], RlpError> {
        match self {
            RlpItem::Bytes(b) => Ok(b),
            RlpItem::List(_) => Err(RlpError::Unexpected("byte string")),
        }
    }

    pub fn as_list(&self) -> Result<&[RlpItem], RlpError> {
        match self {
            RlpItem::List(items) => Ok(items),
            RlpItem::Bytes(_) => Err(RlpError::Unexpected("list")),
        }
    }

    /// Minimal big-endian scalar, at most 32 bytes, no leading zero.
    pub fn as_u256(&self) -> Result<U256, RlpError> {
        let b = self.as_bytes()?;
        scalar_u256(b)
    }

    pub fn as_u64(&self) -> Result<u64, RlpError> {
        let v = self.as_u256()?;
        u64::try_from(v).map_err(|_| RlpError::Unexpected("64-bit scalar"))
    }

    pub fn encode(&self) -> Vec<u8> {
        encode(self)
    }
}

impl std::fmt::Debug for RlpItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RlpItem::Bytes(b) => write!(f, "0x{}", hex::encode(b)),
            RlpItem::List(items) => f.debug_list().entries(items).finish(),
        }
    }
}

/// Parses a canonical scalar byte string into a 256-bit integer.
pub fn scalar_u256(b: &[u8]) -> Result<U256, RlpError> {
    if b.len() > 32 {
        return Err(RlpError::Unexpected("scalar of at most 32 bytes"));
    }
    if b.first() == Some(&0) {
        return Err(RlpError::NonCanonical("scalar with leading zero"));
    }
    let mut buf = [0u8; 32];
    buf[32 - b.len()..].copy_from_slice(b);
    Ok(U256::from_be_bytes(buf))
}

pub fn trim_leading_zeros(b: &[u8]) -> &[u8] {
    let first = b.iter().position(|&x| x != 0).unwrap_or(b.len());
    &b[first..]
}

pub fn encode(item: &RlpItem) -> Vec<u8> {
    let mut out = Vec::new();
    encode_into(item, &mut out);
    out
}

pub fn encode_into(item: &RlpItem, out: &mut Vec<u8>) {
    match item {
        RlpItem::Bytes(b) => encode_bytes_into(b, out),
        RlpItem::List(items) => {
            let mut payload = Vec::new();
            for it in items {
                encode_into(it, &mut payload);
            }
            encode_list_payload_into(&payload, out);
        }
    }
}

pub fn encode_bytes(b: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(b.len() + 9);
    encode_bytes_into(b, &mut out);
    out
}

fn encode_bytes_into(b: &[u8], out: &mut Vec<u8>) {
    if b.len() == 1 && b[0] < 0x80 {
        out.push(b[0]);
    } else {
        write_header(0x80, b.len(), out);
        out.extend_from_slice(b);
    }
}

/// Wraps an already-encoded concatenation of items as a list.
pub fn encode_list_payload(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 9);
    encode_list_payload_into(payload, &mut out);
    out
}

fn encode_list_payload_into(payload: &[u8], out: &mut Vec<u8>) {
    write_header(0xc0, payload.len(), out);
    out.extend_from_slice(payload);
}

fn write_header(base: u8, len: usize, out: &mut Vec<u8>) {
    if len < 56 {
        out.push(base + len as u8);
    } else {
        let len_bytes = (len as u64).to_be_bytes();
        let len_bytes = trim_leading_zeros(&len_bytes);
        out.push(base + 55 + len_bytes.len() as u8);
        out.extend_from_slice(len_bytes);
    }
}

/// Decodes exactly one canonical item spanning all of `data`.
pub fn decode(data: &[u8]) -> Result<RlpItem, RlpError> {
    if data.is_empty() {
        return Err(RlpError::Empty);
    }
    let (item, used) = decode_item(data, 0)?;
    if used != data.len() {
        return Err(RlpError::TrailingBytes(data.len() - used));
    }
    Ok(item)
}

struct Header {
    is_list: bool,
    offset: usize,
    len: usize,
}

fn read_header(data: &[u8]) -> Result<Header, RlpError> {
    let prefix = *data.first().ok_or(RlpError::Truncated)?;
    let header = match prefix {
        0x00..=0x7f => Header { is_list: false, offset: 0, len: 1 },
        0x80..=0xb7 => {
            let len = (prefix - 0x80) as usize;
            if len == 1 {
                let b = *data.get(1).ok_or(RlpError::Truncated)?;
                if b < 0x80 {
                    return Err(RlpError::NonCanonical("single byte below 0x80 with prefix"));
                }
            }
            Header { is_list: false, offset: 1, len }
        }
        0xb8..=0xbf => {
            let (offset, len) = read_long_len(data, (prefix - 0xb7) as usize)?;
            Header { is_list: false, offset, len }
        }
        0xc0..=0xf7 => Header { is_list: true, offset: 1, len: (prefix - 0xc0) as usize },
        0xf8..=0xff => {
            let (offset, len) = read_long_len(data, (prefix - 0xf7) as usize)?;
            Header { is_list: true, offset, len }
        }
    };
    let end = header.offset.checked_add(header.len).ok_or(RlpError::Truncated)?;
    if end > data.len() {
        return Err(RlpError::Truncated);
    }
    Ok(header)
}

fn read_long_len(data: &[u8], len_of_len: usize) -> Result<(usize, usize), RlpError> {
    let len_bytes = data.get(1..1 + len_of_len).ok_or(RlpError::Truncated)?;
    if len_bytes[0] == 0 {
        return Err(RlpError::NonCanonical("length with leading zero"));
    }
    let mut len: u64 = 0;
    for &b in len_bytes {
        len = (len << 8) | b as u64;
    }
    if len < 56 {
        return Err(RlpError::NonCanonical("long-form length for short payload"));
    }
    let len = usize::try_from(len).map_err(|_| RlpError::Truncated)?;
    Ok((1 + len_of_len, len))
}

fn decode_item(data: &[u8], depth: usize) -> Result<(RlpItem, usize), RlpError> {
    if depth > MAX_DEPTH {
        return Err(RlpError::TooDeep);
    }
    let h = read_header(data)?;
    let payload = &data[h.offset..h.offset + h.len];
    let item = if h.is_list {
        let mut items = Vec::new();
        let mut rest = payload;
        while !rest.is_empty() {
            let (it, used) = decode_item(rest, depth + 1)?;
            items.push(it);
            rest = &rest[used..];
        }
        RlpItem::List(items)
    } else {
        RlpItem::Bytes(payload.to_vec())
    };
    Ok((item, h.offset + h.len))
}
