//! Bit strings ↔ `r`-subsets of grid channels.
//!
//! Subsets are ranked lexicographically (sorted ascending channel indices)
//! and the first `2^b` ranks are the codewords. A codeword's bits, read
//! most-significant first, are its rank.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::capacity::{binomial, combinatorial_capacity, Capacity};
use super::{CodecError, FrequencyGrid};

/// A bit string, displayed and serialised as `"0101…"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    /// `len` bits of `value`, most significant first.
    pub fn from_value(value: u128, len: u32) -> Self {
        Bits((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn value(&self) -> u128 {
        self.0.iter().fold(0u128, |acc, &b| (acc << 1) | u128::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Splits `bytes` into chunks of `width` bits, MSB first, zero-padding
    /// the last chunk.
    pub fn chunks_from_bytes(bytes: &[u8], width: usize) -> Vec<Bits> {
        assert!(width > 0);
        let stream: Vec<bool> = bytes
            .iter()
            .flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1 == 1))
            .collect();
        stream
            .chunks(width)
            .map(|c| {
                let mut v = c.to_vec();
                v.resize(width, false);
                Bits(v)
            })
            .collect()
    }

    /// Inverse of [`Bits::chunks_from_bytes`]: concatenates and keeps the
    /// first `byte_len` bytes.
    pub fn concat_to_bytes(chunks: &[Bits], byte_len: usize) -> Vec<u8> {
        let stream: Vec<bool> = chunks.iter().flat_map(|c| c.0.iter().copied()).collect();
        stream
            .chunks(8)
            .take(byte_len)
            .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b)) << (8 - c.len()))
            .collect()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(CodecError::InvalidBits(s.to_string())),
            })
            .collect::<Result<_, _>>()
            .map(Bits)
    }
}

impl Serialize for Bits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    grid: FrequencyGrid,
    capacity: Capacity,
}

impl Codebook {
    pub fn new(grid: FrequencyGrid, tones: usize) -> Result<Self, CodecError> {
        let capacity = combinatorial_capacity(grid.channel_count()?, tones)?;
        Ok(Self { grid, capacity })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn tones(&self) -> usize {
        self.capacity.tones
    }

    pub fn capacity(&self) -> &Capacity {
        &self.capacity
    }

    /// Codeword length `b`.
    pub fn bits(&self) -> u32 {
        self.capacity.bits
    }

    pub fn codeword_count(&self) -> u128 {
        1u128 << self.capacity.bits
    }

    /// Maps `bits` to its `r` tone frequencies, ascending.
    pub fn encode_bits(&self, bits: &Bits) -> Result<Vec<f64>, CodecError> {
        if bits.len() != self.bits() as usize {
            return Err(CodecError::WrongBitLength {
                expected: self.bits() as usize,
                got: bits.len(),
            });
        }
        let subset = unrank(self.capacity.channels, self.capacity.tones, bits.value());
        Ok(subset.into_iter().map(|i| self.grid.frequency(i)).collect())
    }

    /// Inverse of [`Codebook::encode_bits`].
    pub fn decode_bits(&self, tones: &[f64]) -> Result<Bits, CodecError> {
        let mut indices = tones
            .iter()
            .map(|&f| self.grid.index_of(f).ok_or(CodecError::OffGrid(f)))
            .collect::<Result<Vec<_>, _>>()?;
        indices.sort_unstable();
        indices.dedup();
        if indices.len() != self.tones() {
            return Err(CodecError::WrongToneCount {
                expected: self.tones(),
                got: indices.len(),
            });
        }
        let r = rank(self.capacity.channels, &indices);
        if r >= self.codeword_count() {
            return Err(CodecError::UnmappedCodeword { rank: r });
        }
        Ok(Bits::from_value(r, self.bits()))
    }
}

/// Lexicographic rank of the sorted subset `c` of `{0, …, n−1}`.
pub fn rank(n: usize, c: &[usize]) -> u128 {
    let k = c.len();
    let mut r = 0u128;
    let mut next = 0usize;
    for (i, &ci) in c.iter().enumerate() {
        for j in next..ci {
            r += binomial((n - 1 - j) as u64, (k - 1 - i) as u64).expect("fits: bounded by C(n,k)");
        }
        next = ci + 1;
    }
    r
}

/// Subset with lexicographic rank `r` among `k`-subsets of `{0, …, n−1}`.
pub fn unrank(n: usize, k: usize, mut r: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut j = 0usize;
    for i in 0..k {
        loop {
            let block = binomial((n - 1 - j) as u64, (k - 1 - i) as u64).expect("fits");
            if r < block {
                break;
            }
            r -= block;
            j += 1;
        }
        out.push(j);
        j += 1;
    }
    out
}
