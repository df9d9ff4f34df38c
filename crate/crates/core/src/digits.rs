//! Canonical nonnegative decimal numbers stored as digit sequences.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A nonnegative decimal integer of any length, most-significant digit first.
///
/// Always canonical: at least one digit, every digit in `0..=9`, and no
/// leading zero unless the value is zero itself (stored as `[0]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitString {
    digits: Vec<u8>,
}

impl DigitString {
    pub fn zero() -> Self {
        DigitString { digits: vec![0] }
    }

    /// Parses decimal text. Leading zeros are accepted and stripped; signs,
    /// spaces and separators are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        if text.is_empty() {
            return Err(Error::Parse("empty input".into()));
        }
        let mut digits = Vec::with_capacity(text.len());
        for (i, c) in text.chars().enumerate() {
            match c.to_digit(10) {
                Some(d) if c.is_ascii_digit() => digits.push(d as u8),
                _ => {
                    return Err(Error::Parse(format!(
                        "invalid character {c:?} at position {i} in {text:?}"
                    )))
                }
            }
        }
        Ok(Self::canonicalize(digits))
    }

    /// Builds a number from most-significant-first digits, stripping leading
    /// zeros. Fails if any element is not a decimal digit.
    pub fn from_digits(digits: Vec<u8>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Parse("empty digit sequence".into()));
        }
        if let Some(bad) = digits.iter().find(|&&d| d > 9) {
            return Err(Error::Parse(format!("{bad} is not a decimal digit")));
        }
        Ok(Self::canonicalize(digits))
    }

    pub fn from_u64(mut value: u64) -> Self {
        if value == 0 {
            return Self::zero();
        }
        let mut digits = Vec::with_capacity(20);
        while value > 0 {
            digits.push((value % 10) as u8);
            value /= 10;
        }
        digits.reverse();
        DigitString { digits }
    }

    fn canonicalize(mut digits: Vec<u8>) -> Self {
        let first_nonzero = digits.iter().position(|&d| d != 0);
        match first_nonzero {
            None => Self::zero(),
            Some(0) => DigitString { digits },
            Some(k) => {
                digits.drain(..k);
                DigitString { digits }
            }
        }
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    /// Always false; a canonical number has at least one digit.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_zero(&self) -> bool {
        self.digits == [0]
    }

    pub fn to_text(&self) -> String {
        self.digits.iter().map(|&d| char::from(b'0' + d)).collect()
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for DigitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DigitString::parse(s)
    }
}

impl Serialize for DigitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for DigitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        DigitString::parse(&text).map_err(serde::de::Error::custom)
    }
}
