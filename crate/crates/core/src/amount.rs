use std::fmt;
use std::str::FromStr;

use ethnum::U256;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A non-negative balance in an asset's minimal unit (wei, satoshi, token
/// base unit). Values are capped at 256 bits; the canonical byte form is
/// 32-byte big-endian.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(U256);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmountError {
    #[error("amount is negative: {0}")]
    Negative(String),
    #[error("amount does not fit in 32 bytes")]
    TooLarge,
    #[error("amount field must be exactly 32 bytes, got {0}")]
    BadWidth(usize),
    #[error("malformed amount: {0}")]
    Malformed(String),
}

impl Amount {
    pub const ZERO: Amount = Amount(U256::ZERO);
    pub const MAX: Amount = Amount(U256::MAX);

    pub const fn new(v: U256) -> Self {
        Amount(v)
    }

    pub fn from_u64(v: u64) -> Self {
        Amount(U256::from(v))
    }

    pub fn from_u128(v: u128) -> Self {
        Amount(U256::from(v))
    }

    pub fn value(&self) -> U256 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == U256::ZERO
    }

    pub fn checked_add(self, other: Amount) -> Option<Amount> {
        self.0.checked_add(other.0).map(Amount)
    }

    pub fn checked_sub(self, other: Amount) -> Option<Amount> {
        self.0.checked_sub(other.0).map(Amount)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        self.0.to_be_bytes()
    }

    /// Parses the canonical 32-byte big-endian field; any other width is
    /// rejected, including 33-byte values with a leading zero.
    pub fn from_canonical(bytes: &[u8]) -> Result<Self, AmountError> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| AmountError::BadWidth(bytes.len()))?;
        Ok(Amount(U256::from_be_bytes(arr)))
    }

    /// Big-endian bytes of any length up to 32 (leading zeros allowed).
    pub fn from_be_slice(bytes: &[u8]) -> Result<Self, AmountError> {
        let trimmed = crate::hashcodec::rlp::trim_leading_zeros(bytes);
        if trimmed.len() > 32 {
            return Err(AmountError::TooLarge);
        }
        let mut buf = [0u8; 32];
        buf[32 - trimmed.len()..].copy_from_slice(trimmed);
        Ok(Amount(U256::from_be_bytes(buf)))
    }

    pub fn to_hex_quantity(&self) -> String {
        format!("{:#x}", self.0)
    }
}

impl From<u64> for Amount {
    fn from(v: u64) -> Self {
        Amount::from_u64(v)
    }
}

impl From<U256> for Amount {
    fn from(v: U256) -> Self {
        Amount(v)
    }
}

impl FromStr for Amount {
    type Err = AmountError;

    /// Decimal, or `0x`-prefixed hex quantity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.starts_with('-') {
            return Err(AmountError::Negative(s.to_string()));
        }
        if s.is_empty() {
            return Err(AmountError::Malformed("empty".into()));
        }
        let (digits, radix) = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(h) => (h, 16),
            None => (s, 10),
        };
        if digits.is_empty() || !digits.chars().all(|c| c.is_digit(radix)) {
            return Err(AmountError::Malformed(s.to_string()));
        }
        U256::from_str_radix(digits, radix)
            .map(Amount)
            .map_err(|_| AmountError::TooLarge)
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Amount({})", self.0)
    }
}

impl Serialize for Amount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Amount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Num(u64),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Num(n) => Ok(Amount::from_u64(n)),
        }
    }
}
