//! Fixed-length bit strings.
//!
//! Every string in the protocol (the masks `r0`, `r1`, basis choices `s`,
//! Bob's outcomes `d0`, `d1`, inputs `x0`, `x1`, masked messages `t0`, `t1`)
//! is a [`BitString`]. Index `j` holds the `j`-th entry, zero based.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// Bits of `value`, least significant bit first, truncated to `len`.
    pub fn from_index(value: u64, len: usize) -> Self {
        BitString((0..len).map(|j| (value >> j) & 1 == 1).collect())
    }

    /// Inverse of [`BitString::from_index`].
    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (j, &b)| acc | ((b as u64) << j))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        BitString((0..len).map(|_| rng.random::<bool>()).collect())
    }

    /// All `2^len` strings of the given length, in index order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "enumeration length too large");
        (0..1u64 << len).map(move |v| BitString::from_index(v, len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> bool {
        self.0[j]
    }

    pub fn set(&mut self, j: usize, value: bool) {
        self.0[j] = value;
    }

    pub fn flip(&mut self, j: usize) -> Result<(), BitsError> {
        let len = self.len();
        let bit = self
            .0
            .get_mut(j)
            .ok_or(BitsError::OutOfRange { index: j, len })?;
        *bit = !*bit;
        Ok(())
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        self.check_len(other)?;
        Ok(BitString(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn hamming_distance(&self, other: &BitString) -> Result<usize, BitsError> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count())
    }

    /// Restriction to the positions listed in `set`, in the order given.
    pub fn restrict(&self, set: &[usize]) -> Result<BitString, BitsError> {
        set.iter()
            .map(|&j| {
                self.0.get(j).copied().ok_or(BitsError::OutOfRange {
                    index: j,
                    len: self.len(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }

    fn check_len(&self, other: &BitString) -> Result<(), BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(BitString::default());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitsError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString(iter.into_iter().collect())
    }
}

/// Largest Hamming distance tolerated at error fraction `gamma` over `n` bits,
/// i.e. `floor(gamma * n)`. The small offset keeps products such as
/// `0.1 * 10` from rounding down.
pub fn tolerated_errors(n: usize, gamma: f64) -> usize {
    (gamma * n as f64 + 1e-9).floor().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_keeps_listed_positions() {
        let a: BitString = "1011".parse().unwrap();
        // positions 1 and 3 in one-based labels
        assert_eq!(a.restrict(&[0, 2]).unwrap().to_string(), "11");
        assert!(a.restrict(&[4]).is_err());
    }

    #[test]
    fn index_round_trip() {
        for v in 0..16 {
            assert_eq!(BitString::from_index(v, 4).to_index(), v);
        }
    }

    #[test]
    fn xor_rejects_length_mismatch() {
        let a = BitString::zeros(3);
        let b = BitString::zeros(4);
        assert_eq!(
            a.xor(&b),
            Err(BitsError::LengthMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn tolerated_errors_floors() {
        assert_eq!(tolerated_errors(100, 0.015), 1);
        assert_eq!(tolerated_errors(10, 0.1), 1);
        assert_eq!(tolerated_errors(1, 0.0), 0);
        assert_eq!(tolerated_errors(8, 0.25), 2);
    }

    #[test]
    fn empty_string_displays_as_dash() {
        let e = BitString::default();
        assert_eq!(e.to_string(), "-");
        assert_eq!("-".parse::<BitString>().unwrap(), e);
    }
}
