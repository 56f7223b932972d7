// SPDX-License-Identifier: Apache-2.0

//! Keys as character vectors and as sets of position characters.
//!
//! Character 0 is the least-significant `char_bits` bits of the key.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Splits keys into `char_count` characters of `char_bits` bits.
///
/// When `char_bits * char_count` exceeds 64 the top character is only partly
/// backed by key bits; keys are still at most 64 bits wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyCodec {
    char_bits: u32,
    char_count: u32,
}

impl KeyCodec {
    pub fn new(char_bits: u32, char_count: u32) -> Result<Self> {
        if char_bits == 0 || char_count == 0 {
            return Err(Error::domain("char_bits and char_count must be positive"));
        }
        if char_bits > 64 || u64::from(char_bits) * u64::from(char_count - 1) >= 64 {
            return Err(Error::domain(format!(
                "{char_count} characters of {char_bits} bits exceed a 64-bit key"
            )));
        }
        Ok(KeyCodec {
            char_bits,
            char_count,
        })
    }

    pub fn char_bits(&self) -> u32 {
        self.char_bits
    }

    pub fn char_count(&self) -> u32 {
        self.char_count
    }

    /// `min(char_bits * char_count, 64)`.
    pub fn key_bits(&self) -> u32 {
        (self.char_bits * self.char_count).min(64)
    }

    /// |Φ| = 2^char_bits.
    pub fn alphabet_size(&self) -> u128 {
        1 << self.char_bits
    }

    pub fn char_mask(&self) -> u64 {
        low_mask(self.char_bits)
    }

    pub fn key_mask(&self) -> u64 {
        low_mask(self.key_bits())
    }

    pub fn check_key(&self, key: u64) -> Result<()> {
        if key & !self.key_mask() != 0 {
            return Err(Error::domain(format!(
                "key {key:#x} does not fit in {} bits",
                self.key_bits()
            )));
        }
        Ok(())
    }

    /// Character `i` is bits `[i*b, (i+1)*b)` of `key`.
    pub fn split_key(&self, key: u64) -> Result<Vec<u64>> {
        self.check_key(key)?;
        let mask = self.char_mask();
        Ok((0..self.char_count)
            .map(|i| (key >> (i * self.char_bits)) & mask)
            .collect())
    }

    pub fn join_key(&self, chars: &[u64]) -> Result<u64> {
        if chars.len() != self.char_count as usize {
            return Err(Error::domain(format!(
                "expected {} characters, got {}",
                self.char_count,
                chars.len()
            )));
        }
        let mut key = 0u64;
        for (i, &ch) in chars.iter().enumerate() {
            if ch & !self.char_mask() != 0 {
                return Err(Error::domain(format!(
                    "character {ch:#x} at position {i} exceeds {} bits",
                    self.char_bits
                )));
            }
            let shifted = ch << (i as u32 * self.char_bits);
            if shifted >> (i as u32 * self.char_bits) != ch {
                return Err(Error::domain(format!(
                    "character {ch:#x} at position {i} does not fit in a {}-bit key",
                    self.key_bits()
                )));
            }
            key |= shifted;
        }
        Ok(key)
    }
}

pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A pair (position, character).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PositionChar {
    pub position: u32,
    pub character: u64,
}

impl PositionChar {
    pub fn new(position: u32, character: u64) -> Self {
        PositionChar { position, character }
    }
}

/// A set of position characters under a fixed codec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionCharSet {
    codec: KeyCodec,
    members: BTreeSet<PositionChar>,
}

impl PositionCharSet {
    pub fn empty(codec: KeyCodec) -> Self {
        PositionCharSet {
            codec,
            members: BTreeSet::new(),
        }
    }

    /// The key viewed as `{(i, x_i) : i < c}`.
    pub fn from_key(codec: KeyCodec, key: u64) -> Result<Self> {
        let members = codec
            .split_key(key)?
            .into_iter()
            .enumerate()
            .map(|(i, ch)| PositionChar::new(i as u32, ch))
            .collect();
        Ok(PositionCharSet { codec, members })
    }

    pub fn from_members<I>(codec: KeyCodec, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = PositionChar>,
    {
        let mut set = BTreeSet::new();
        for pc in members {
            if pc.position >= codec.char_count() || pc.character > codec.char_mask() {
                return Err(Error::domain(format!(
                    "position character ({}, {:#x}) out of range",
                    pc.position, pc.character
                )));
            }
            if !set.insert(pc) {
                return Err(Error::domain(format!(
                    "duplicate position character ({}, {:#x})",
                    pc.position, pc.character
                )));
            }
        }
        Ok(PositionCharSet { codec, members: set })
    }

    pub fn codec(&self) -> KeyCodec {
        self.codec
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, pc: &PositionChar) -> bool {
        self.members.contains(pc)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PositionChar> + '_ {
        self.members.iter()
    }

    /// True when the set holds exactly one character per position.
    pub fn is_key(&self) -> bool {
        self.members.len() == self.codec.char_count() as usize
            && self
                .members
                .iter()
                .enumerate()
                .all(|(i, pc)| pc.position == i as u32)
    }

    /// `x △ y`. For two keys this is `{(i,x_i),(i,y_i) : x_i != y_i}`.
    pub fn symmetric_difference(&self, other: &PositionCharSet) -> Result<PositionCharSet> {
        if self.codec != other.codec {
            return Err(Error::domain(
                "symmetric difference of sets under different codecs",
            ));
        }
        Ok(PositionCharSet {
            codec: self.codec,
            members: self
                .members
                .symmetric_difference(&other.members)
                .copied()
                .collect(),
        })
    }
}
