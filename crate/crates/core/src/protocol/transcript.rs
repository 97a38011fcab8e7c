use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Sequence of received bits, i.e. a node of the protocol tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Transcript(Vec<u8>);

impl Transcript {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self(bits)
    }

    /// The `len` low-order bits of `index`, most significant first.
    pub fn from_index(index: u64, len: usize) -> Self {
        Self(
            (0..len)
                .map(|i| ((index >> (len - 1 - i)) & 1) as u8)
                .collect(),
        )
    }

    /// Inverse of [`Transcript::from_index`]; only meaningful for `len <= 64`.
    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(bit & 1);
    }

    pub fn extend_from_slice(&mut self, bits: &[u8]) {
        self.0.extend_from_slice(bits);
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for Transcript {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Spec(format!(
                    "invalid transcript character {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Transcript)
    }
}

impl From<Transcript> for String {
    fn from(t: Transcript) -> Self {
        t.to_string()
    }
}

impl TryFrom<String> for Transcript {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_and_string_forms_agree() {
        let t: Transcript = "1011".parse().unwrap();
        assert_eq!(t.to_index(), 0b1011);
        assert_eq!(Transcript::from_index(0b1011, 4), t);
        assert_eq!(t.to_string(), "1011");
        assert!("10x".parse::<Transcript>().is_err());
        assert_eq!(Transcript::from_index(1, 3).to_string(), "001");
    }
}
